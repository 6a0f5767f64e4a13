//! Fit the DCT + sub-band PCA transform and check that it decorrelates.

use rrq::eval::{synth_corpus, SynthConfig};
use rrq::PreprocessModel;

fn main() -> rrq::Result<()> {
    let corpus = synth_corpus(&SynthConfig::new(300, 20, 16, 16, 2.0, 1))?;
    let pre = PreprocessModel::fit(&corpus.train, 4)?;
    println!(
        "{}x{} images, {} sub-bands of {} coefficients, {} rotation parameters",
        pre.height(),
        pre.width(),
        pre.subbands(),
        pre.subband_len(),
        pre.rotation_parameter_count()
    );

    let xs: Vec<Vec<f64>> = corpus
        .train
        .iter()
        .map(|im| pre.forward(im))
        .collect::<Result<_, _>>()?;
    let n = xs.len() as f64;
    let var = |j: usize| xs.iter().map(|x| x[j] * x[j]).sum::<f64>() / n;
    let cov01 = xs.iter().map(|x| x[0] * x[1]).sum::<f64>() / n;
    println!(
        "leading variances {:.4} {:.4} {:.4}, cov(0,1) {:.2e}",
        var(0),
        var(1),
        var(2),
        cov01
    );

    let x = pre.forward(&corpus.test[0])?;
    let back = pre.inverse(&x)?;
    let err = back
        .pixels()
        .iter()
        .zip(corpus.test[0].pixels())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("roundtrip max pixel error {err:.2e}");
    Ok(())
}
