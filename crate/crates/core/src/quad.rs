//! Quadrature primitives: Gauss–Legendre rules, adaptive panel integration of
//! matrix-valued functions, and cumulative integration matrices used by the
//! iterated-series propagator.

use ndarray::Array2;

use crate::C64;

/// Legendre polynomial `P_n` and its derivative at `z`, by the three-term
/// recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = (n as f64) * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending. Nodes come out exactly symmetric: the negative half is the
/// mirrored positive half, and odd rules carry an exact zero in the middle.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "empty quadrature rule");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = (n + 1) / 2;
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..64 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 5e-16 * z.abs().max(1.0) {
                let (p, d) = legendre(n, z);
                dp = d;
                z -= p / d;
                break;
            }
        }
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
            let (_, d) = legendre(n, z);
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

/// Maps reference nodes/weights from `[-1, 1]` onto `[a, b]`.
pub fn map_to(nodes: &[f64], weights: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let xs = nodes.iter().map(|&t| mid + half * t).collect();
    let ws = weights.iter().map(|&w| half * w).collect();
    (xs, ws)
}

/// Fixed `n`-point Gauss–Legendre integral of a scalar function on `[a, b]`.
pub fn integrate_gl<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, n: usize) -> C64 {
    let (t, w) = gauss_legendre(n);
    let (xs, ws) = map_to(&t, &w, a, b);
    xs.iter()
        .zip(&ws)
        .map(|(&x, &wi)| f(x) * wi)
        .fold(C64::new(0.0, 0.0), |acc, v| acc + v)
}

fn gl_panel<F: FnMut(f64) -> Array2<C64>>(
    f: &mut F,
    xs: &[f64],
    ws: &[f64],
    shape: (usize, usize),
) -> Array2<C64> {
    let mut acc = Array2::<C64>::zeros(shape);
    for (&x, &w) in xs.iter().zip(ws) {
        acc.scaled_add(C64::new(w, 0.0), &f(x));
    }
    acc
}

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Adaptive panel integration of a matrix-valued function.
///
/// Panels are accepted when a 12-point rule and an embedded 6-point rule
/// agree to `rel_tol` relative to the panel value; otherwise the panel is
/// bisected (depth-limited). Supplied `breakpoints` (e.g. kinks of a profile)
/// seed the initial panel edges so the error estimate never straddles a
/// non-smooth point. The error control is purely relative, so scaling the
/// integrand scales the result exactly.
pub fn adaptive_matrix<F: FnMut(f64) -> Array2<C64>>(
    f: &mut F,
    a: f64,
    b: f64,
    rel_tol: f64,
    breakpoints: &[f64],
    shape: (usize, usize),
) -> Array2<C64> {
    let mut edges: Vec<f64> = vec![a];
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    cuts.dedup();
    edges.extend(cuts);
    edges.push(b);

    let (t6, w6) = gauss_legendre(6);
    let (t12, w12) = gauss_legendre(12);
    let mut total = Array2::<C64>::zeros(shape);
    for pair in edges.windows(2) {
        refine_panel(
            f,
            pair[0],
            pair[1],
            rel_tol,
            0,
            (&t6, &w6),
            (&t12, &w12),
            &mut total,
        );
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn refine_panel<F: FnMut(f64) -> Array2<C64>>(
    f: &mut F,
    a: f64,
    b: f64,
    rel_tol: f64,
    depth: usize,
    coarse: (&[f64], &[f64]),
    fine: (&[f64], &[f64]),
    total: &mut Array2<C64>,
) {
    let shape = (total.nrows(), total.ncols());
    let (xc, wc) = map_to(coarse.0, coarse.1, a, b);
    let (xf, wf) = map_to(fine.0, fine.1, a, b);
    let ic = gl_panel(f, &xc, &wc, shape);
    let iff = gl_panel(f, &xf, &wf, shape);
    let err = max_abs(&(&iff - &ic));
    let scale = max_abs(&iff);
    if err <= rel_tol * scale || err == 0.0 || depth >= 40 {
        *total += &iff;
    } else {
        let mid = 0.5 * (a + b);
        refine_panel(f, a, mid, rel_tol, depth + 1, coarse, fine, total);
        refine_panel(f, mid, b, rel_tol, depth + 1, coarse, fine, total);
    }
}

/// Barycentric weights of an interpolation grid.
fn bary_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] /= nodes[i] - nodes[j];
            }
        }
    }
    w
}

/// Lagrange basis polynomial `L_beta` of the grid, evaluated at `t` in
/// barycentric form.
fn lagrange_at(nodes: &[f64], bary: &[f64], beta: usize, t: f64) -> f64 {
    for (j, &xj) in nodes.iter().enumerate() {
        if t == xj {
            return if j == beta { 1.0 } else { 0.0 };
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, (&xj, &wj)) in nodes.iter().zip(bary).enumerate() {
        let c = wj / (t - xj);
        den += c;
        if j == beta {
            num = c;
        }
    }
    num / den
}

/// Cumulative integration matrix of a Gauss–Legendre grid on `[-1, 1]`:
/// `S[alpha][beta] = integral of L_beta from -1 to node alpha`, where
/// `L_beta` is the Lagrange basis of the grid. Applying `S` to samples of a
/// degree `< n` polynomial gives its running integral at the nodes exactly;
/// this powers the iterated (Volterra) series in the transfer module.
pub fn cumulative_matrix(nodes: &[f64], _weights: &[f64]) -> Array2<f64> {
    let n = nodes.len();
    let bary = bary_weights(nodes);
    let (t, w) = gauss_legendre(n);
    let mut s = Array2::<f64>::zeros((n, n));
    for alpha in 0..n {
        let (xs, ws) = map_to(&t, &w, -1.0, nodes[alpha]);
        for beta in 0..n {
            let mut acc = 0.0;
            for (&x, &wi) in xs.iter().zip(&ws) {
                acc += wi * lagrange_at(nodes, &bary, beta, x);
            }
            s[[alpha, beta]] = acc;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_is_exact_for_polynomials() {
        // 8 points integrate degree <= 15 exactly: try x^14 on [0, 2].
        let (t, w) = gauss_legendre(8);
        let (xs, ws) = map_to(&t, &w, 0.0, 2.0);
        let got: f64 = xs.iter().zip(&ws).map(|(&x, &wi)| wi * x.powi(14)).sum();
        assert_relative_eq!(got, 2.0_f64.powi(15) / 15.0, max_relative = 1e-14);
    }

    #[test]
    fn gl_weights_sum_to_interval_length() {
        for n in [3, 8, 31, 64] {
            let (_, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert_relative_eq!(sum, 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn gl_nodes_are_symmetric_and_interior() {
        for n in [7, 16] {
            let (x, w) = gauss_legendre(n);
            for i in 0..n {
                assert_eq!(x[i], -x[n - 1 - i]);
                assert_eq!(w[i], w[n - 1 - i]);
                assert!(x[i].abs() < 1.0);
            }
        }
        let (x, _) = gauss_legendre(9);
        assert_eq!(x[4], 0.0);
    }

    #[test]
    fn adaptive_handles_oscillation_and_kinks() {
        // integral of |x| * exp(i 5 x) over [-1, 2], against the closed form
        // computed by integration by parts on each smooth piece.
        let mut f = |x: f64| {
            let mut m = Array2::<C64>::zeros((1, 1));
            m[[0, 0]] = C64::new(0.0, 5.0 * x).exp() * x.abs();
            m
        };
        let got = adaptive_matrix(&mut f, -1.0, 2.0, 1e-12, &[0.0], (1, 1))[[0, 0]];
        let piece = |a: f64, b: f64, sign: f64| {
            let ik = C64::new(0.0, 5.0);
            let anti = |x: f64| C64::new(0.0, 5.0 * x).exp() * (C64::new(sign * x, 0.0) / ik - sign / (ik * ik));
            anti(b) - anti(a)
        };
        let want = piece(-1.0, 0.0, -1.0) + piece(0.0, 2.0, 1.0);
        assert_relative_eq!(got.re, want.re, max_relative = 1e-10);
        assert_relative_eq!(got.im, want.im, max_relative = 1e-10);
    }

    #[test]
    fn adaptive_is_exactly_linear_in_the_integrand() {
        let gauss = |x: f64| {
            let mut m = Array2::<C64>::zeros((1, 1));
            m[[0, 0]] = C64::new((-x * x).exp(), 0.0);
            m
        };
        let one = adaptive_matrix(&mut { gauss }, -3.0, 3.0, 1e-10, &[], (1, 1))[[0, 0]];
        let mut doubled = |x: f64| gauss(x) * C64::new(2.0, 0.0);
        let two = adaptive_matrix(&mut doubled, -3.0, 3.0, 1e-10, &[], (1, 1))[[0, 0]];
        assert_eq!(two, one * C64::new(2.0, 0.0));
    }

    #[test]
    fn cumulative_matrix_reproduces_running_integrals() {
        // Apply S to samples of cos on [-1, 1] (mapped): the polynomial part
        // is exact for degree < 8, and the degree-7 interpolant of cos
        // carries an interpolation error of order 1e-8 into its integral.
        let (x, w) = gauss_legendre(8);
        let s = cumulative_matrix(&x, &w);
        let poly: Vec<f64> = x.iter().map(|&t| t.powi(5)).collect();
        for alpha in 0..8 {
            let got: f64 = (0..8).map(|b| s[[alpha, b]] * poly[b]).sum();
            let want = (x[alpha].powi(6) - 1.0) / 6.0;
            assert_relative_eq!(got, want, epsilon = 1e-13);
        }
        let cosv: Vec<f64> = x.iter().map(|&t| t.cos()).collect();
        for alpha in 0..8 {
            let got: f64 = (0..8).map(|b| s[[alpha, b]] * cosv[b]).sum();
            let want = x[alpha].sin() + 1.0_f64.sin();
            assert_relative_eq!(got, want, epsilon = 1e-7);
        }
    }
}
