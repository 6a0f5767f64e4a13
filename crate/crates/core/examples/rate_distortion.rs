//! Train/test distortion-rate curves written as CSV to stdout.

use rrq::eval::{dr_sweep, geometric_grid, synth_corpus, write_dr_csv, SynthConfig};
use rrq::rrq::train;
use rrq::{PreprocessModel, TrainConfig};

fn main() -> rrq::Result<()> {
    let corpus = synth_corpus(&SynthConfig::new(200, 50, 32, 32, 2.0, 4))?;
    let pre = PreprocessModel::fit(&corpus.train, 16)?;
    let xs: Vec<Vec<f64>> = corpus
        .train
        .iter()
        .map(|im| pre.forward(im))
        .collect::<Result<_, _>>()?;
    let (model, _) = train(&xs, &TrainConfig::uniform(128, 16, 9))?;

    let grid = geometric_grid(128);
    let train_curve = dr_sweep(&corpus.train, &pre, &model, &grid)?;
    let test_curve = dr_sweep(&corpus.test, &pre, &model, &grid)?;
    write_dr_csv(
        std::io::stdout(),
        &[("train", &train_curve), ("test", &test_curve)],
    )
}
