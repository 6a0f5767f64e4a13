//! Random regularized codebooks against learned k-means codebooks.

use rrq::eval::{dr_sweep, kmeans::DEFAULT_MAX_ITERS, kmeans_rq_train, synth_corpus, SynthConfig};
use rrq::rrq::train;
use rrq::{PreprocessModel, TrainConfig};

fn main() -> rrq::Result<()> {
    let corpus = synth_corpus(&SynthConfig::new(100, 100, 32, 32, 2.0, 6))?;
    let pre = PreprocessModel::fit(&corpus.train, 16)?;
    let xs: Vec<Vec<f64>> = corpus
        .train
        .iter()
        .map(|im| pre.forward(im))
        .collect::<Result<_, _>>()?;
    let (rrq_model, _) = train(&xs, &TrainConfig::uniform(16, 16, 1))?;
    let km = kmeans_rq_train(&xs, 16, 16, 1, DEFAULT_MAX_ITERS)?;

    let grid = [1, 2, 4, 8, 16];
    let curves = [
        (
            "rrq",
            dr_sweep(&corpus.train, &pre, &rrq_model, &grid)?,
            dr_sweep(&corpus.test, &pre, &rrq_model, &grid)?,
        ),
        (
            "kmeans",
            dr_sweep(&corpus.train, &pre, &km, &grid)?,
            dr_sweep(&corpus.test, &pre, &km, &grid)?,
        ),
    ];
    println!("model   layers  train_mse   test_mse    test/train");
    for (name, tr, te) in &curves {
        for (a, b) in tr.iter().zip(te) {
            println!(
                "{name:<7} {:>6}  {:.3e}  {:.3e}  {:.2}",
                a.layers,
                a.mse,
                b.mse,
                b.mse / a.mse
            );
        }
    }
    Ok(())
}
