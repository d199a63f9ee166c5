//! Synthetic GUE levels: the β = 2 tridiagonal model, diagonalized by
//! implicit QL and unfolded with the semicircle law.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use zerocorr_core::empirical::{pair_counts, CorrelationHistogram, Window};

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`), ascending.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: &[f64]) -> Vec<f64> {
    let n = d.len();
    assert_eq!(off.len() + 1, n.max(1));
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 64, "QL did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// Eigenvalues of one GUE(n) matrix, semicircle radius `2√n`.
pub fn spectrum(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let off: Vec<f64> = (1..n)
        .rev()
        .map(|k| {
            let x: f64 = ChiSquared::new(2.0 * k as f64).unwrap().sample(rng);
            (0.5 * x).sqrt()
        })
        .collect();
    tridiagonal_eigenvalues(d, &off)
}

/// Expected number of levels below `x` for GUE(n).
pub fn semicircle_count(x: f64, n: usize) -> f64 {
    let u = (x / (2.0 * (n as f64).sqrt())).clamp(-1.0, 1.0);
    n as f64 * (0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI)
}

/// One spectrum mapped to unit mean density.
pub fn unfolded(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    spectrum(n, rng).into_iter().map(|x| semicircle_count(x, n)).collect()
}

/// Nearest-neighbour spacings from the central half of `matrices` spectra.
pub fn bulk_spacings(matrices: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..matrices {
        let u = unfolded(n, &mut rng);
        out.extend(u[n / 4..3 * n / 4].windows(2).map(|w| w[1] - w[0]));
    }
    out
}

/// Pair histogram (unit density) pooled over `matrices` spectra. Only levels
/// in the central half start a pair; partners come from the whole spectrum,
/// so the ends of each sample leave no edge deficit.
pub fn sine_kernel_histogram(matrices: usize, n: usize, edges: &[f64], seed: u64) -> CorrelationHistogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = Window::new(0.5 * n as f64, 0.5 * n as f64).unwrap();
    let mut total: Option<CorrelationHistogram> = None;
    for _ in 0..matrices {
        let u = unfolded(n, &mut rng);
        let a = u.partition_point(|&x| x < window.lo());
        let b = u.partition_point(|&x| x < window.hi());
        let raw = pair_counts(&u, a..b, edges);
        let h = CorrelationHistogram::from_raw(edges.to_vec(), raw, window, window.width).unwrap();
        total = Some(match total {
            None => h,
            Some(t) => t.merge(&h).unwrap(),
        });
    }
    total.expect("at least one matrix")
}

pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
