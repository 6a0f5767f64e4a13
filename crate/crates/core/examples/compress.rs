//! Train a model, save it, compress a few images and decode them back.

use rrq::codec::{self, ModelBundle};
use rrq::eval::{psnr, synth_corpus, SynthConfig};
use rrq::rrq::train;
use rrq::{PreprocessModel, ResidualQuantizer, TrainConfig};

fn main() -> rrq::Result<()> {
    let corpus = synth_corpus(&SynthConfig::new(200, 4, 32, 32, 2.0, 11))?;
    let pre = PreprocessModel::fit(&corpus.train, 16)?;
    let xs: Vec<Vec<f64>> = corpus
        .train
        .iter()
        .map(|im| pre.forward(im))
        .collect::<Result<_, _>>()?;
    let (model, _) = train(&xs, &TrainConfig::uniform(32, 256, 5))?;
    let bundle = ModelBundle::new(pre, model)?;

    let dir = std::env::temp_dir().join("rrq-compress-example");
    std::fs::create_dir_all(&dir)?;
    let model_path = dir.join("model.rrqm");
    codec::save_model(&model_path, &bundle)?;
    let bundle = codec::load_model(&model_path)?;
    println!(
        "model {} ({} bytes)",
        hex_prefix(&bundle.digest()),
        std::fs::metadata(&model_path)?.len()
    );

    for layers in [4, 16, 32] {
        let bytes = codec::compress_to_bytes(&corpus.test, &bundle, layers)?;
        let decoded = codec::decompress_bytes(&bytes, &bundle)?;
        let mean_psnr = corpus
            .test
            .iter()
            .zip(&decoded)
            .map(|(a, b)| psnr(a, b))
            .sum::<rrq::Result<f64>>()?
            / decoded.len() as f64;
        println!(
            "{layers:>2} layers: {} payload bits/image, {:.4} bpp, {} stream bytes, {mean_psnr:.2} dB",
            bundle.quantizer().prefix_bits(layers),
            codec::bits_per_pixel(bundle.quantizer(), layers, 32 * 32),
            bytes.len()
        );
    }
    Ok(())
}

fn hex_prefix(d: &[u8; 32]) -> String {
    d[..6].iter().map(|b| format!("{b:02x}")).collect()
}
