//! Acceptance suite: one test per shipped guarantee, ordered roughly from
//! structural baselines to end-to-end behaviour. Every test prints a single
//! `[PASS]`/`[FAIL]` line carrying the numbers it judged, so
//! `cargo test --test acceptance -- --nocapture` doubles as a report. All
//! tolerances are pinned here, next to the check they gate.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use ndarray::Array1;
use pwscat::operators::{self, KernelBlock};
use pwscat::potentials::SampledKernel;
use pwscat::scattering::solve_incidence;
use pwscat::transfer::{self, TransferMatrix};
use pwscat::verify::{self, LocalityOptions};
use pwscat::{
    C64, EvolveOptions, Family, IncidenceSpec, Method, Mode, MomentumGrid, Potential, Profile,
    Side, SolveOptions, YKernel,
};

const TAU: f64 = std::f64::consts::TAU;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn prop_grid(k: f64, n: usize, inserts: &[f64]) -> Arc<MomentumGrid> {
    Arc::new(MomentumGrid::propagating(k, n, inserts).unwrap())
}

fn full_grid(k: f64, n: usize, n_ev: usize, lambda: f64, inserts: &[f64]) -> Arc<MomentumGrid> {
    Arc::new(MomentumGrid::extended(k, n, n_ev, lambda, inserts).unwrap())
}

fn ode(rtol: f64) -> EvolveOptions {
    EvolveOptions { rtol, ..EvolveOptions::default() }
}

/// Largest entry deviation of a transfer matrix from the unit map.
fn identity_dev(m: &TransferMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..2 {
        for cc in 0..2 {
            let block = m.block(r, cc);
            for ((i, j), z) in block.indexed_iter() {
                let target = if r == cc && i == j { 1.0 } else { 0.0 };
                worst = worst.max((z - c(target, 0.0)).norm());
            }
        }
    }
    worst
}

fn tm_gap(a: &TransferMatrix, b: &TransferMatrix) -> f64 {
    a.op().sub(b.op()).unwrap().max_abs()
}

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:02} — {name}: {detail}");
    assert!(pass, "criterion {id:02} ({name}): {detail}");
}

#[test]
fn c01_zero_potential_is_the_unit_map() {
    let v = Potential::new(
        Family::GaussianModulated { alpha: 1.0, beta: 0.8 },
        c(0.0, 0.0),
        (-0.4, 0.6),
        Profile::RaisedCosine,
    )
    .unwrap();
    let opts = ode(1e-10);
    let gp = prop_grid(1.0, 64, &[0.3]);
    let gf = full_grid(1.0, 64, 32, 4.0, &[0.3]);
    let mp = transfer::evolve(&v, &gp, Mode::Propagating, Method::Ode, &opts).unwrap();
    let mf = transfer::evolve(&v, &gf, Mode::Full, Method::Ode, &opts).unwrap();
    let dev = identity_dev(&mp).max(identity_dev(&mf));

    let spec = IncidenceSpec::new(&gp, Side::Left, 0.3).unwrap();
    let set = solve_incidence(&mp, &spec, &SolveOptions::default()).unwrap().amplitudes();
    let f_max = set.samples.iter().map(|s| s.f.norm()).fold(0.0, f64::max);

    let pass = dev <= 1e-12 && f_max <= 1e-14;
    verdict(
        1,
        "zero potential: unit transfer matrix and null amplitudes",
        pass,
        &format!("max block deviation {dev:.2e} (<= 1e-12), max |f| {f_max:.2e} (<= 1e-14)"),
    );
}

#[test]
fn c02_projection_algebra_and_sector_separation() {
    let grid = full_grid(1.0, 64, 32, 4.0, &[0.35]);
    let p = operators::projector(&grid).unwrap();
    // P^2 - P and P(1 - P) = P - P^2 share the same entries up to sign
    let idem = p.dot(&p).unwrap().sub(&p).unwrap().max_abs();

    // Solving in full mode from either side must leave the right-face
    // left-moving component zero: on open nodes that is "no flux incoming
    // from the right", on closed nodes "no tail growing into the right
    // half-space". Rebuild that face from the stored solution and the
    // transfer blocks and measure the violation.
    let v = Potential::new(
        Family::GaussianModulated { alpha: 0.8, beta: 0.9 },
        c(0.6, 0.2),
        (-0.4, 0.6),
        Profile::RaisedCosine,
    )
    .unwrap();
    let m = transfer::evolve(&v, &grid, Mode::Full, Method::Ode, &ode(1e-10)).unwrap();
    let n_open = grid.n_prop();
    let dim = m.dim();
    let mut worst = 0.0_f64;
    for (side, theta0) in [(Side::Left, 0.35), (Side::Right, PI - 0.35)] {
        let spec = IncidenceSpec::new(&grid, side, theta0).unwrap();
        assert!(spec.node < n_open, "incidence must ride an open channel");
        let res = solve_incidence(&m, &spec, &SolveOptions::default()).unwrap();
        assert_eq!(res.transmitted_side().len(), n_open);
        assert_eq!(res.reflected_side().len(), n_open);
        let tail_l = res.left_tail().unwrap();
        let tail_r = res.right_tail().unwrap();
        assert_eq!(tail_l.len(), dim - n_open);
        assert_eq!(tail_r.len(), dim - n_open);

        let amp = grid.kx(spec.node) * (TAU / grid.p_weight(spec.node));
        // left-face left-movers over all channels, unscattered delta restored
        let mut x_minus = Array1::<C64>::zeros(dim);
        for i in 0..n_open {
            x_minus[i] = res.reflected_side()[i];
        }
        if side == Side::Right {
            x_minus[spec.node] += amp;
        }
        for (i, z) in tail_l.iter().enumerate() {
            x_minus[n_open + i] = *z;
        }
        let mut face = m.block(1, 1).dot(&x_minus);
        match side {
            Side::Left => {
                let mut a_in = Array1::<C64>::zeros(dim);
                a_in[spec.node] = amp;
                face = face + m.block(1, 0).dot(&a_in);
            }
            Side::Right => face[spec.node] -= amp,
        }
        let rel = face.iter().map(|z| z.norm()).fold(0.0, f64::max) / amp.norm();
        worst = worst.max(rel);
    }

    let pass = idem == 0.0 && worst <= 1e-8;
    verdict(
        2,
        "projector idempotent, evanescent nodes carry no wave coefficients",
        pass,
        &format!("|P^2-P| = {idem:.1e} (exact), worst face violation {worst:.2e} (<= 1e-8)"),
    );
}

#[test]
fn c03_one_sided_spectrum_makes_the_reduction_exact() {
    let v = Potential::new(
        Family::InversePole { beta: 1.0, ell: 1 },
        c(1.0, 0.0),
        (0.0, 1.0),
        Profile::Uniform,
    )
    .unwrap();
    let tau = 1e-8;
    let gaps: Vec<f64> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&lambda| {
            let grid = full_grid(1.0, 64, 32, lambda, &[]);
            verify::exactness_gap(&v, &grid, tau).unwrap()
        })
        .collect();

    let grid4 = full_grid(1.0, 64, 32, 4.0, &[]);
    let r2 = verify::product_identity_gap(&v, &grid4, 2, 0.5, 0.25).unwrap();
    let r3 = verify::product_identity_gap(&v, &grid4, 3, 0.5, 0.25).unwrap();

    let pass =
        gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 1e-3 && r2 < 1e-8 && r3 < 1e-8;
    verdict(
        3,
        "one-sided spectrum: restriction gap shrinks with the cutoff",
        pass,
        &format!(
            "gap at cutoff 2k/3k/4k = {:.3e}/{:.3e}/{:.3e} (last <= 1e-3), \
             alternating-product residual n=2 {:.1e}, n=3 {:.1e} (<= 1e-8)",
            gaps[0], gaps[1], gaps[2], r2, r3
        ),
    );
}

#[test]
fn c04_weak_coupling_matches_first_order() {
    let base = Potential::new(
        Family::GaussianModulated { alpha: 1.1, beta: 0.7 },
        c(1.0, 0.0),
        (-0.3, 0.5),
        Profile::RaisedCosine,
    )
    .unwrap();
    let grid = prop_grid(1.0, 64, &[0.3]);
    let spec = IncidenceSpec::new(&grid, Side::Left, 0.3).unwrap();
    let opts = EvolveOptions { rtol: 1e-12, born_tol: 1e-12, ..EvolveOptions::default() };
    let sopts = SolveOptions::default();

    // |f - f_born| / zeta at every outgoing angle, for halving strengths
    let devs: Vec<Vec<f64>> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&zeta| {
            let v = base.scaled(c(zeta, 0.0));
            let m = transfer::evolve(&v, &grid, Mode::Propagating, Method::Ode, &opts).unwrap();
            let b = transfer::born_transfer(&v, &grid, &opts).unwrap();
            let fm = solve_incidence(&m, &spec, &sopts).unwrap().amplitudes();
            let fb = solve_incidence(&b, &spec, &sopts).unwrap().amplitudes();
            fm.samples
                .iter()
                .zip(&fb.samples)
                .map(|(s, t)| (s.f - t.f).norm() / zeta)
                .collect()
        })
        .collect();

    // halving the strength must halve the normalized residual, angle by angle
    let mut pass = true;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..devs[0].len() {
        for j in 0..2 {
            let ratio = devs[j][i] / devs[j + 1][i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            pass &= (1.7..=2.3).contains(&ratio);
        }
    }
    verdict(
        4,
        "first-order residual scales linearly in the coupling",
        pass,
        &format!("per-angle halving ratios in [{lo:.3}, {hi:.3}] (required within 2 +/- 0.3)"),
    );
}

#[test]
fn c05_band_limited_kernels_coincide_inside_the_window() {
    let kappa = 2.0;
    let line = Potential::new(Family::DeltaLine, c(0.5, 0.0), (-0.25, 0.25), Profile::Uniform)
        .unwrap();
    let sinc = Potential::new(
        Family::SincLine { kappa },
        c(0.5, 0.0),
        (-0.25, 0.25),
        Profile::Uniform,
    )
    .unwrap();
    let kernel_gap = |g: &Arc<MomentumGrid>, xs: &[f64]| -> f64 {
        xs.iter()
            .map(|&x| {
                let a = operators::potential_kernel(&line, g, x, KernelBlock::Open).unwrap();
                let b = operators::potential_kernel(&sinc, g, x, KernelBlock::Open).unwrap();
                a.sub(&b).unwrap().max_abs()
            })
            .fold(0.0, f64::max)
    };
    let amp_gap = |g: &Arc<MomentumGrid>, theta0: f64| -> f64 {
        let opts = ode(1e-11);
        let spec = IncidenceSpec::new(g, Side::Left, theta0).unwrap();
        let fa = solve_incidence(
            &transfer::evolve(&line, g, Mode::Propagating, Method::Ode, &opts).unwrap(),
            &spec,
            &SolveOptions::default(),
        )
        .unwrap()
        .amplitudes();
        let fb = solve_incidence(
            &transfer::evolve(&sinc, g, Mode::Propagating, Method::Ode, &opts).unwrap(),
            &spec,
            &SolveOptions::default(),
        )
        .unwrap()
        .amplitudes();
        fa.samples
            .iter()
            .zip(&fb.samples)
            .map(|(s, t)| (s.f - t.f).norm())
            .fold(0.0, f64::max)
    };

    // k = kappa/2: every transfer momentum stays inside the band
    let g_in = prop_grid(1.0, 64, &[0.25]);
    let k_in = kernel_gap(&g_in, &[-0.2, 0.0, 0.15]);
    let a_in = amp_gap(&g_in, 0.25);
    // k > kappa/2: transfer momenta cross the band edge
    let g_out = prop_grid(1.5, 64, &[0.2]);
    let k_out = kernel_gap(&g_out, &[0.0]);
    let a_out = amp_gap(&g_out, 0.2);

    let pass = k_in <= 1e-13 && a_in <= 1e-10 && k_out > 0.0 && a_out > 0.0;
    verdict(
        5,
        "band-limited line kernel equals the sharp one below half-band",
        pass,
        &format!(
            "inside: kernel gap {k_in:.1e} (<= 1e-13), amplitude gap {a_in:.1e} (<= 1e-10); \
             outside: kernel gap {k_out:.2e} > 0, amplitude gap {a_out:.2e} > 0"
        ),
    );
}

#[test]
fn c06_delta_plane_closed_form_and_narrow_box_limit() {
    let zeta = c(0.7, 0.2);
    let plane = Potential::new(
        Family::DeltaXSlab { kernel: YKernel::GaussianModulated { alpha: 0.9, beta: 0.6 } },
        zeta,
        (0.0, 0.0),
        Profile::Uniform,
    )
    .unwrap();
    let grid = prop_grid(1.0, 64, &[]);
    let exact = transfer::delta_x_transfer(&plane, &grid, Mode::Propagating).unwrap();
    let first_order = transfer::born_transfer(&plane, &grid, &ode(1e-10)).unwrap();
    let split = tm_gap(&exact, &first_order); // series terminates: must be exact

    // a uniform box of the same strength converges to the plane linearly in
    // its width (the leading error is the half-width offset of its center)
    let opts = ode(1e-12);
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&w| {
            let boxed = Potential::new(
                Family::GaussianModulated { alpha: 0.9, beta: 0.6 },
                zeta / w,
                (0.0, w),
                Profile::Uniform,
            )
            .unwrap();
            let u = transfer::evolve(&boxed, &grid, Mode::Propagating, Method::Ode, &opts)
                .unwrap();
            tm_gap(&u, &exact)
        })
        .collect();
    let r1 = errs[0] / errs[1];
    let r2 = errs[1] / errs[2];

    let pass = split == 0.0
        && errs.iter().all(|&e| e > 0.0)
        && (1.5..=2.5).contains(&r1)
        && (1.5..=2.5).contains(&r2);
    verdict(
        6,
        "single-plane propagator is exact at first order; boxes close in linearly",
        pass,
        &format!(
            "closed form vs first order {split:.1e} (exact); box errors {:.2e}/{:.2e}/{:.2e}, \
             halving ratios {r1:.2}, {r2:.2} (required within [1.5, 2.5])",
            errs[0], errs[1], errs[2]
        ),
    );
}

#[test]
fn c07_point_interaction_matches_the_rank_one_solution() {
    let zeta = c(0.5, 0.3);
    let v = Potential::new(
        Family::DeltaXSlab { kernel: YKernel::Delta },
        zeta,
        (0.0, 0.0),
        Profile::Uniform,
    )
    .unwrap();
    let grid = prop_grid(1.0, 64, &[0.2]);
    let m = transfer::delta_x_transfer(&v, &grid, Mode::Propagating).unwrap();
    let spec = IncidenceSpec::new(&grid, Side::Left, 0.2).unwrap();
    let set = solve_incidence(&m, &spec, &SolveOptions::default()).unwrap().amplitudes();

    // rank-one kernel: with the angular weights summing to pi, the solved
    // coefficient is zeta-dependent but direction-independent
    let coeff = -C64::i() * zeta / 2.0 / (c(1.0, 0.0) + C64::i() * zeta / 4.0);
    let oracle = -C64::i() / TAU.sqrt() * coeff;
    let dev =
        set.samples.iter().map(|s| (s.f - oracle).norm()).fold(0.0, f64::max);
    let iso = set
        .samples
        .iter()
        .map(|s| (s.f - set.samples[0].f).norm())
        .fold(0.0, f64::max);

    let pass = dev <= 1e-8 && iso <= 1e-8;
    verdict(
        7,
        "point interaction reproduces the analytic rank-one amplitude",
        pass,
        &format!(
            "max |f - oracle| {dev:.2e}, direction spread {iso:.2e} (both <= 1e-8, |oracle| {:.3e})",
            oracle.norm()
        ),
    );
}

#[test]
fn c08_midpoint_split_reproduces_the_whole_slab() {
    let v = Potential::new(
        Family::GaussianModulated { alpha: 1.1, beta: 0.7 },
        c(0.6, 0.25),
        (-0.5, 0.7),
        Profile::RaisedCosine,
    )
    .unwrap();
    let tau = 1e-10;
    let opts = ode(tau);
    let mid = 0.1;
    let mut worst = 0.0_f64;
    for (grid, mode) in [
        (prop_grid(1.0, 64, &[]), Mode::Propagating),
        (full_grid(1.0, 64, 32, 4.0, &[]), Mode::Full),
    ] {
        let whole = transfer::evolve(&v, &grid, mode, Method::Ode, &opts).unwrap();
        let left = transfer::evolve_interval(&v, &grid, mode, Method::Ode, -0.5, mid, &opts)
            .unwrap();
        let right = transfer::evolve_interval(&v, &grid, mode, Method::Ode, mid, 0.7, &opts)
            .unwrap();
        let joined = transfer::compose(&right, &left).unwrap();
        let scale = whole.op().max_abs().max(1.0);
        worst = worst.max(tm_gap(&joined, &whole) / scale);
    }
    let pass = worst <= 10.0 * tau;
    verdict(
        8,
        "evolving in two sections equals evolving in one",
        pass,
        &format!("worst relative split deviation {worst:.2e} (<= 10 * tolerance = {:.0e})", 10.0 * tau),
    );
}

#[test]
fn c09_band_limited_action_turns_pointwise_at_high_energy() {
    let v = Potential::new(
        Family::GaussianModulated { alpha: 10.0, beta: 4.0 },
        c(1.0, 0.0),
        (-0.5, 0.5),
        Profile::Uniform,
    )
    .unwrap();
    let opts = LocalityOptions::default();
    let d20 = verify::high_energy_locality(&v, 0.0, 20.0, &opts).unwrap();
    let d40 = verify::high_energy_locality(&v, 0.0, 40.0, &opts).unwrap();
    let pass = d20.is_finite() && d20 > 0.0 && d40 < 0.5 * d20;
    verdict(
        9,
        "doubling the band edge at least halves the banding error",
        pass,
        &format!("discrepancy {d20:.3e} at k=20 vs {d40:.3e} at k=40 (ratio {:.3})", d40 / d20),
    );
}

#[test]
fn c10_reflected_potential_scatters_into_reflected_angles() {
    let v = Potential::new(
        Family::InversePole { beta: 0.8, ell: 2 },
        c(0.9, 0.3),
        (-0.3, 0.4),
        Profile::RaisedCosine,
    )
    .unwrap();
    let w = v.reflected_y();
    let grid = prop_grid(1.0, 64, &[-0.35, 0.35]);
    let opts = ode(1e-10);
    let sopts = SolveOptions::default();

    let direct = {
        let m = transfer::evolve(&w, &grid, Mode::Propagating, Method::Ode, &opts).unwrap();
        let spec = IncidenceSpec::new(&grid, Side::Left, 0.35).unwrap();
        solve_incidence(&m, &spec, &sopts).unwrap().amplitudes()
    };
    let mapped = {
        let m = transfer::evolve(&v, &grid, Mode::Propagating, Method::Ode, &opts).unwrap();
        let spec = IncidenceSpec::new(&grid, Side::Left, -0.35).unwrap();
        solve_incidence(&m, &spec, &sopts).unwrap().amplitudes().mirrored()
    };

    assert_eq!(direct.samples.len(), mapped.samples.len());
    let mut angle_misalign = 0.0_f64;
    let mut dev = 0.0_f64;
    for (a, b) in direct.samples.iter().zip(&mapped.samples) {
        angle_misalign = angle_misalign.max((a.theta - b.theta).abs());
        dev = dev.max((a.f - b.f).norm());
    }
    let pass = angle_misalign <= 1e-12 && dev <= 1e-8;
    verdict(
        10,
        "y-reflection of the potential mirrors the amplitude set",
        pass,
        &format!("angle misalignment {angle_misalign:.1e}, max |f - f'| {dev:.2e} (<= 1e-8)"),
    );
}

#[test]
fn c11_closed_channel_coupling_never_vanishes_and_is_linear() {
    let grid = full_grid(1.0, 64, 32, 4.0, &[]);
    let slab = (-0.2, 0.2);
    let table = SampledKernel::new(
        vec![-1.0, -0.4, 0.3, 1.0],
        vec![0.0, 0.8, 0.5, 0.0],
        8.0,
        64,
    )
    .unwrap();
    let cases: Vec<(Potential, f64)> = vec![
        (Potential::new(Family::DeltaLine, c(0.5, 0.0), slab, Profile::Uniform).unwrap(), 0.05),
        (
            Potential::new(Family::SincLine { kappa: 2.5 }, c(0.5, 0.0), slab, Profile::Uniform)
                .unwrap(),
            0.05,
        ),
        (
            Potential::new(
                Family::DeltaXSlab { kernel: YKernel::Delta },
                c(0.4, 0.1),
                (0.1, 0.1),
                Profile::Uniform,
            )
            .unwrap(),
            0.1,
        ),
        (
            Potential::new(
                Family::DeltaXSlab {
                    kernel: YKernel::GaussianModulated { alpha: 0.8, beta: 0.5 },
                },
                c(0.4, 0.0),
                (0.1, 0.1),
                Profile::Uniform,
            )
            .unwrap(),
            0.1,
        ),
        (
            Potential::new(
                Family::DeltaXSlab { kernel: YKernel::InversePole { beta: 0.6, ell: 1 } },
                c(0.4, 0.0),
                (0.1, 0.1),
                Profile::Uniform,
            )
            .unwrap(),
            0.1,
        ),
        (
            Potential::new(
                Family::SeparableSpectrum { beta: 0.9, ell: 2 },
                c(0.7, 0.0),
                slab,
                Profile::Uniform,
            )
            .unwrap(),
            0.05,
        ),
        (
            Potential::new(
                Family::InversePole { beta: 1.1, ell: 1 },
                c(0.7, 0.2),
                slab,
                Profile::Uniform,
            )
            .unwrap(),
            0.05,
        ),
        (
            Potential::new(
                Family::GaussianModulated { alpha: 1.3, beta: 0.8 },
                c(0.7, 0.0),
                slab,
                Profile::Uniform,
            )
            .unwrap(),
            0.05,
        ),
        (
            Potential::new(
                Family::ProductSeparable { kernel: table },
                c(0.7, 0.0),
                slab,
                Profile::Uniform,
            )
            .unwrap(),
            0.05,
        ),
    ];

    let mut min_norm = f64::INFINITY;
    let mut worst_lin = 0.0_f64;
    let mut pass = true;
    for (v, x) in &cases {
        let n1 = operators::coupling_norm(v, &grid, *x).unwrap();
        let n2 = operators::coupling_norm(&v.scaled(c(2.0, 0.0)), &grid, *x).unwrap();
        let lin = (n2 - 2.0 * n1).abs() / (2.0 * n1);
        min_norm = min_norm.min(n1);
        worst_lin = worst_lin.max(lin);
        pass &= n1 > 1e-10 && lin <= 1e-12;
    }
    verdict(
        11,
        "every family couples open to closed channels, linearly in the strength",
        pass,
        &format!(
            "{} families: smallest coupling norm {min_norm:.2e} (> 1e-10), \
             worst doubling nonlinearity {worst_lin:.1e} (<= 1e-12)",
            cases.len()
        ),
    );
}

const DETERMINISM_CONFIG: &str = r#"
[potential]
family = "inverse_pole"
coupling = [0.6, 0.0]
support = [-0.3, 0.3]
profile = "uniform"
beta = 0.7
ell = 1

[physics]
k = 1.0
incidence = [
  { side = "left", theta0_deg = 12.0 },
  { side = "right", theta0_deg = 200.0 },
]

[numerics]
n = 20
mode = "full"
n_ev = 6
lambda_over_k = 3.0
method = "ode"
rtol = 1e-9

[output]
formats = ["csv", "json"]
precision = 12
"#;

fn run_cli(bin: &str, sub: &str, cfg: &Path, out: &Path, extra: &[&str]) {
    let status = Command::new(bin)
        .arg(sub)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{sub} failed: {}",
        String::from_utf8_lossy(&status.stderr)
    );
}

/// Compares two output directories file by file; returns how many files matched.
fn assert_trees_equal(a: &Path, b: &Path) -> usize {
    let list = |dir: &Path| -> Vec<String> {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        names
    };
    let names = list(a);
    assert_eq!(names, list(b), "runs produced different file sets");
    assert!(!names.is_empty(), "run produced no files");
    for name in &names {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical runs");
    }
    names.len()
}

#[test]
fn c12_cli_runs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, DETERMINISM_CONFIG).unwrap();
    let bin = env!("CARGO_BIN_EXE_pwscat");

    let mut matched = 0usize;
    for sub in ["amplitude", "compare", "verify", "grid-report", "grid-convergence"] {
        let o1 = dir.path().join(format!("{sub}-1"));
        let o2 = dir.path().join(format!("{sub}-2"));
        run_cli(bin, sub, &cfg, &o1, &[]);
        run_cli(bin, sub, &cfg, &o2, &[]);
        matched += assert_trees_equal(&o1, &o2);
    }
    // the worker count must not leak into the bytes either
    let o3 = dir.path().join("amplitude-3");
    run_cli(bin, "amplitude", &cfg, &o3, &["--threads", "3"]);
    matched += assert_trees_equal(&dir.path().join("amplitude-1"), &o3);

    verdict(
        12,
        "every subcommand rerun is byte-identical",
        true,
        &format!("{matched} file comparisons identical across reruns and worker counts"),
    );
}
