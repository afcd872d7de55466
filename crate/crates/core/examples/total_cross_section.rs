//! Minimal end-to-end run: one slab, one incidence, total cross section.

use std::sync::Arc;

use pwscat::scattering::solve_incidence;
use pwscat::transfer::{self, EvolveOptions};
use pwscat::{
    C64, Family, IncidenceSpec, Method, Mode, MomentumGrid, Potential, Profile, Side,
    SolveOptions,
};

fn main() -> pwscat::Result<()> {
    let v = Potential::new(
        Family::GaussianModulated { alpha: 1.1, beta: 0.7 },
        C64::new(0.6, 0.2),
        (-0.4, 0.6),
        Profile::RaisedCosine,
    )?;
    let theta0 = 20f64.to_radians();
    let grid = Arc::new(MomentumGrid::propagating(1.0, 64, &[theta0])?);
    let m = transfer::evolve(&v, &grid, Mode::Propagating, Method::Ode,
                             &EvolveOptions::default())?;
    let spec = IncidenceSpec::new(&grid, Side::Left, theta0)?;
    let result = solve_incidence(&m, &spec, &SolveOptions::default())?;
    let set = result.amplitudes();
    println!("total cross section {:.6}", set.total_cross_section());
    Ok(())
}
