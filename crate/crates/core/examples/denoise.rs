//! Denoising by truncation: PSNR against depth for two noise levels.

use rrq::eval::{add_noise, denoise, geometric_grid, synth_corpus, DenoiseOptions, SynthConfig};
use rrq::rrq::train;
use rrq::{PreprocessModel, TrainConfig};

fn main() -> rrq::Result<()> {
    let mut cfg = SynthConfig::new(200, 1, 32, 32, 2.0, 8);
    cfg.pixel_std = 0.25;
    let corpus = synth_corpus(&cfg)?;
    let pre = PreprocessModel::fit(&corpus.train, cfg.subbands)?;
    let xs: Vec<Vec<f64>> = corpus
        .train
        .iter()
        .map(|im| pre.forward(im))
        .collect::<Result<_, _>>()?;
    let (model, _) = train(&xs, &TrainConfig::uniform(64, 256, 2))?;

    let clean = &corpus.test[0];
    for sigma2 in [0.15, 0.3] {
        let noisy = add_noise(clean, sigma2, 77)?;
        let opts = DenoiseOptions {
            grid: geometric_grid(64),
            sigma2_hint: Some(sigma2),
            heuristic: true,
        };
        let (r, _) = denoise(&noisy, Some(clean), &pre, &model, &opts)?;
        let curve: Vec<String> = r
            .layers
            .iter()
            .zip(&r.psnr_db)
            .map(|(l, p)| format!("{l}:{p:.2}"))
            .collect();
        println!("sigma2 {sigma2}: {}", curve.join(" "));
        println!(
            "  best {} layers ({:.2} dB), heuristic {} layers ({:.2} dB)",
            r.best_layer.unwrap_or(0),
            r.best_psnr_db.unwrap_or(f64::NAN),
            r.heuristic_layer.unwrap_or(0),
            r.heuristic_psnr_db.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
