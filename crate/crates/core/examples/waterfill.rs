//! Reverse water-filling on a small variance profile.

use rrq::waterfill::{rate_at_gamma, solve_for_distortion, solve_for_rate};
use rrq::VarianceProfile;

fn main() -> rrq::Result<()> {
    let profile = VarianceProfile::new(vec![4.0, 2.0, 1.0, 0.5, 0.25, 0.1])?;
    println!("total variance {:.3}", profile.total());

    let sol = solve_for_distortion(&profile, 2.0)?;
    println!(
        "budget 2.0 -> gamma {:.6}, {} active, {:.4} bits",
        sol.gamma, sol.active_set_size, sol.rate_bits
    );

    for bits in [1.0, 4.0, 8.0] {
        let sol = solve_for_rate(&profile, bits)?;
        println!(
            "{bits:>4} bits -> gamma {:.6}, rate {:.6}, codeword variances {:?}",
            sol.gamma,
            rate_at_gamma(&profile, sol.gamma)?,
            sol.codeword_variances
                .iter()
                .map(|v| (v * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}
