//! Independent reference values for the integration suites.
#![allow(dead_code)]

use seqshare_core::bell::BellFunctional;

/// Quantum maximum on the singlet with coplanar sharp settings, by grid search.
///
/// With Alice's unit vectors `x_u` fixed, `<A_u B_v> = -x_u . y_v` and the best
/// Bob vector for column `v` is antiparallel to `sum_u c_uv x_u`, so the value is
/// `constant + sum_v |sum_u c_uv x_u|`. Alice's first angle is fixed at zero by
/// rotation symmetry; the remaining angles are searched on a grid, then the best
/// cells are zoomed in on.
pub fn planar_singlet_max(f: &BellFunctional) -> f64 {
    let c = f.compile();
    let n = c.n_alice;
    let value = |angles: &[f64]| -> f64 {
        let mut total = c.constant;
        for v in 0..c.n_bob {
            let (mut sx, mut sy) = (0.0, 0.0);
            for u in 0..n {
                let a = if u == 0 { 0.0 } else { angles[u - 1] };
                sx += c.corr[u][v] * a.cos();
                sy += c.corr[u][v] * a.sin();
            }
            total += sx.hypot(sy);
        }
        total
    };
    let free = n - 1;
    let grid: usize = match free {
        0 | 1 => 720,
        2 => 180,
        _ => 48,
    };
    let tau = std::f64::consts::TAU;
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let total = grid.pow(free as u32);
    for idx in 0..total {
        let mut k = idx;
        let angles: Vec<f64> = (0..free)
            .map(|_| {
                let a = (k % grid) as f64 * tau / grid as f64;
                k /= grid;
                a
            })
            .collect();
        candidates.push((value(&angles), angles));
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(16);

    let mut best = candidates[0].0;
    for (mut val, mut x) in candidates {
        let mut h = tau / grid as f64;
        while h > 1e-9 {
            let mut improved = false;
            for i in 0..free {
                for s in [-1.0, 1.0] {
                    let mut y = x.clone();
                    y[i] += s * h;
                    let vy = value(&y);
                    if vy > val {
                        val = vy;
                        x = y;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best = best.max(val);
    }
    best
}

/// Two-Bob CHSH values on the singlet with the standard settings: `2 sqrt2 lambda` and
/// `sqrt2 (1 + sqrt(1 - lambda^2))`.
pub fn chsh_chain_values(lambda: f64) -> (f64, f64) {
    let r2 = std::f64::consts::SQRT_2;
    (
        2.0 * r2 * lambda,
        r2 * (1.0 + (1.0 - lambda * lambda).sqrt()),
    )
}
