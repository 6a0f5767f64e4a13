//! Generate a small synthetic corpus and write it as PGM files.

use rrq::eval::{synth_corpus, SynthConfig};
use rrq::pgm;

fn main() -> rrq::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("rrq-synth"));
    let corpus = synth_corpus(&SynthConfig::new(16, 4, 32, 32, 2.0, 3))?;
    for (dir, set) in [("train", &corpus.train), ("test", &corpus.test)] {
        std::fs::create_dir_all(out.join(dir))?;
        for (i, im) in set.iter().enumerate() {
            pgm::write(out.join(dir).join(format!("{i:04}.pgm")), im)?;
        }
    }
    println!(
        "wrote {} + {} images under {}",
        corpus.train.len(),
        corpus.test.len(),
        out.display()
    );
    Ok(())
}
