//! `verify`: run the randomized property suites and print their worst
//! observed deviations.

use anyhow::Result;
use clap::Args;

use depth_reid::verify::{log_spectrum_equivalence_suite, rotation_invariance_suite};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random SPD pairs for the log-spectrum equivalence suite.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    /// Random feature sets for the rotation-invariance suite.
    #[arg(long, default_value_t = 200)]
    pub sets: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

const TOLERANCE: f64 = 1e-8;

pub fn run(args: &VerifyArgs) -> Result<()> {
    let t1 = log_spectrum_equivalence_suite(args.pairs, args.seed)?;
    println!(
        "log-spectrum equivalence: {} pairs, max deviation {:.3e} ({:.2?})",
        t1.cases, t1.max_deviation, t1.elapsed
    );
    let rot = rotation_invariance_suite(args.sets, args.seed)?;
    println!(
        "rotation invariance:      {} sets, max deviation {:.3e} ({:.2?})",
        rot.cases, rot.max_deviation, rot.elapsed
    );
    if t1.max_deviation > TOLERANCE || rot.max_deviation > TOLERANCE {
        // Classified as a numerical failure so the process exits with 3.
        return Err(depth_reid::Error::Conditioning(format!(
            "verification exceeded tolerance {TOLERANCE:.0e}: {:.3e} / {:.3e}",
            t1.max_deviation, rot.max_deviation
        ))
        .into());
    }
    println!("all deviations within {TOLERANCE:.0e}");
    Ok(())
}
