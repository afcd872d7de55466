//! Shared fixtures for the criterion benches: representative grids and
//! potentials sized so a full run stays in seconds.

use std::sync::Arc;

use pwscat::{C64, Family, MomentumGrid, Potential, Profile, YKernel};

/// Smooth two-sided slab: the generic workload.
pub fn smooth_slab() -> Potential {
    Potential::new(
        Family::GaussianModulated { alpha: 1.1, beta: 0.7 },
        C64::new(0.6, 0.2),
        (-0.4, 0.6),
        Profile::RaisedCosine,
    )
    .unwrap()
}

/// One-sided spectrum: the family whose closed-channel reduction is exact.
pub fn one_sided_slab() -> Potential {
    Potential::new(
        Family::InversePole { beta: 1.0, ell: 1 },
        C64::new(1.0, 0.0),
        (0.0, 1.0),
        Profile::Uniform,
    )
    .unwrap()
}

/// Interaction concentrated on a single plane, propagated in closed form.
pub fn delta_plane() -> Potential {
    Potential::new(
        Family::DeltaXSlab { kernel: YKernel::GaussianModulated { alpha: 0.9, beta: 0.6 } },
        C64::new(0.7, 0.2),
        (0.0, 0.0),
        Profile::Uniform,
    )
    .unwrap()
}

/// Propagating channels only.
pub fn open_grid(n: usize) -> Arc<MomentumGrid> {
    Arc::new(MomentumGrid::propagating(1.0, n, &[0.2]).unwrap())
}

/// Open plus closed channels up to `lambda * k`.
pub fn extended_grid(n: usize, n_ev: usize, lambda: f64) -> Arc<MomentumGrid> {
    Arc::new(MomentumGrid::extended(1.0, n, n_ev, lambda, &[0.2]).unwrap())
}
