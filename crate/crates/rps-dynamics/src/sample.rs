//! Seeded, reproducible random sampling on the simplex.
//!
//! Uniform simplex samples come from normalizing three exponential variates.
//! All randomness flows through a counter-based generator seeded explicitly,
//! so every sweep and every verification run is replayable from its seed,
//! and parallel consumers get independent streams by index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{classify_region, GameParams, RegionLabel, Strategy};
use crate::error::{Error, Result};
use crate::symmetry::{classify_branch, project_pi, BranchLabel};

/// A reproducible generator: `seed` selects the experiment, `stream` the
/// independent substream (one per parallel worker or grid point).
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One point drawn uniformly from the 2-simplex.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R) -> Strategy {
    loop {
        let mut e = [0.0; 3];
        for v in &mut e {
            let u: f64 = rng.gen();
            *v = -(1.0 - u).ln();
        }
        if e.iter().sum::<f64>() > 0.0 {
            return Strategy::renormalized(e);
        }
    }
}

/// A uniform sample conditioned on carrying a region label (not Γ).
///
/// Γ has measure zero, so rejection virtually never triggers; the bound
/// exists to make the loop total.
pub fn sample_regular<R: Rng + ?Sized>(
    g: &GameParams,
    rng: &mut R,
    max_tries: usize,
) -> Result<Strategy> {
    for _ in 0..max_tries {
        let x = sample_simplex(rng);
        if classify_region(g, &x) != RegionLabel::Gamma {
            return Ok(x);
        }
    }
    Err(Error::GammaCollision {
        detail: format!("no regular sample found in {max_tries} tries"),
    })
}

/// A sample on the return-map section: a uniform simplex point projected to
/// the fundamental region and accepted only when it lies in branch B.
pub fn sample_branch_b<R: Rng + ?Sized>(
    g: &GameParams,
    rng: &mut R,
    max_tries: usize,
) -> Result<Strategy> {
    for _ in 0..max_tries {
        let x = sample_simplex(rng);
        if classify_region(g, &x) == RegionLabel::Gamma {
            continue;
        }
        let (y, _) = project_pi(g, &x)?;
        if classify_branch(g, &y) == BranchLabel::B {
            return Ok(y);
        }
    }
    Err(Error::NotInBranchB)
}
