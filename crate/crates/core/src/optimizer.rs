//! Derivative-free building blocks: full-factorial grids and a box-projected
//! Nelder–Mead simplex.

/// Outcome of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Simplex settings. Standard reflection/expansion/contraction/shrink
/// coefficients are used.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Stop when `max f − min f` over the simplex is at most this.
    pub f_tol: f64,
    /// Stop when every vertex lies within this of the best one, per coordinate.
    pub x_tol: f64,
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

fn project(x: &mut [f64], bounds: &[[f64; 2]]) {
    for (v, [lo, hi]) in x.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimizes `f` from `x0` with initial per-coordinate steps `step`, keeping
/// every trial point inside `bounds`.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], bounds: &[[f64; 2]], opts: SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x0 = x0.to_vec();
    project(&mut x0, bounds);
    if n == 0 {
        let f0 = f(&x0);
        return SimplexResult { x: x0, f: f0, iterations: 0, converged: true };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), f(&x0)));
    for j in 0..n {
        let mut x = x0.clone();
        x[j] += step[j];
        // step away from a bound we are sitting on
        if x[j] > bounds[j][1] {
            x[j] = x0[j] - step[j];
        }
        project(&mut x, bounds);
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        order(&mut simplex);
        let best = &simplex[0];
        let spread = simplex[n].1 - best.1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol || diameter <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let toward = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            project(&mut p, bounds);
            p
        };

        let xr = toward(ALPHA);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = toward(GAMMA);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        // contraction, outside if the reflection improved on the worst
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = toward(RHO * ALPHA);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = toward(-RHO);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (v, b) in x.iter_mut().zip(&x_best) {
                *v = b + SIGMA * (*v - b);
            }
            *fx = f(x);
        }
    }
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    SimplexResult { x, f: fx, iterations, converged }
}

/// Mixed-radix decoding of a flat grid index.
pub fn grid_point(index: usize, axes: &[Vec<f64>]) -> Vec<f64> {
    let mut rem = index;
    let mut p = vec![0.0; axes.len()];
    for j in (0..axes.len()).rev() {
        let n = axes[j].len();
        p[j] = axes[j][rem % n];
        rem /= n;
    }
    p
}

/// `n` evenly spaced values covering `[lo, hi]` inclusively.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}
