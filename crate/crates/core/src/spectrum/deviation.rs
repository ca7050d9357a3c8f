use serde::Serialize;

use crate::cocycle::StepCocycle;
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::par::Exec;
use crate::scalar::{Accumulator, Scalar};

/// `χ_α(x, n) = #{0 ≤ j < n : T^j x ∈ I_α}`.
pub fn visit_counts<S: Scalar>(iet: &Iet<S>, x: &S, n: u64) -> Result<Vec<u64>> {
    if !iet.contains(x) {
        return Err(Error::OutOfDomain {
            value: x.to_exact_string(),
            bound: iet.total_length().to_exact_string(),
        });
    }
    let mut counts = vec![0u64; iet.d()];
    let mut y = x.clone();
    for _ in 0..n {
        let a = iet.letter_at(&y);
        counts[a] += 1;
        y = y + iet.translation(a);
    }
    Ok(counts)
}

/// Integers spaced evenly in log scale between `lo` and `hi` (inclusive, deduplicated).
pub fn log_grid(lo: u64, hi: u64, per_decade: usize) -> Vec<u64> {
    let lo = lo.max(1);
    if hi < lo || per_decade == 0 {
        return Vec::new();
    }
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let steps = ((b - a) * per_decade as f64).ceil() as usize;
    let mut out: Vec<u64> = (0..=steps)
        .map(|k| {
            let t = if steps == 0 {
                a
            } else {
                a + (b - a) * k as f64 / steps as f64
            };
            (10f64.powf(t).round() as u64).clamp(lo, hi)
        })
        .collect();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationRow {
    pub n: u64,
    /// `max_x |S_n f(x)|` over the sample points.
    pub max_birkhoff: f64,
    /// `max_x max_{j ≤ n} |S_j f(x)|`.
    pub running_max_birkhoff: f64,
    /// Per letter, `max_x |χ_α(x, n) − λ_α n|`.
    pub max_visit_deviation: Vec<f64>,
    /// Per letter, `max_x max_{j ≤ n} |χ_α(x, j) − λ_α j|`.
    pub running_max_visit_deviation: Vec<f64>,
}

/// Least-squares line through `(ln n, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoglogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    /// Root mean square of the residuals in log space.
    pub residual_rms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationScan {
    pub x_samples: usize,
    pub rows: Vec<DeviationRow>,
    /// Fit of `max |S_n f|` on the upper half of the grid; `None` when degenerate.
    pub birkhoff_fit: Option<LoglogFit>,
    /// Same fit for the running maximum.
    pub running_birkhoff_fit: Option<LoglogFit>,
    /// Fit of the largest per-letter visit deviation, same window.
    pub visit_fit: Option<LoglogFit>,
    pub running_visit_fit: Option<LoglogFit>,
}

/// Fits `ln y = slope · ln n + intercept` on the points with `y > 0`.
/// `None` with fewer than two usable points or a constant abscissa.
pub fn fit_loglog(points: &[(u64, f64)]) -> Option<LoglogFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, y)| *n > 0 && *y > 0.0 && y.is_finite())
        .map(|&(n, y)| ((n as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Some(LoglogFit {
        slope,
        intercept,
        points: pts.len(),
        residual_rms: (rss / k).sqrt(),
    })
}

/// Deviations of one orbit at one grid time.
struct Sample {
    birkhoff: f64,
    running_birkhoff: f64,
    visits: Vec<f64>,
    running_visits: Vec<f64>,
}

fn scan_one<S: Scalar>(iet: &Iet<S>, f: &StepCocycle<S>, x: S, grid: &[u64]) -> Vec<Sample> {
    let d = iet.d();
    let lambda: Vec<f64> = iet.lambda().iter().map(|l| l.to_f64()).collect();
    let mut counts = vec![0u64; d];
    let mut running_visits = vec![0.0f64; d];
    let mut running_birkhoff = 0.0f64;
    let mut acc = S::Acc::default();
    let mut y = x;
    let mut j = 0u64;
    let mut out = Vec::with_capacity(grid.len());
    let deviations = |counts: &[u64], j: u64| -> Vec<f64> {
        counts
            .iter()
            .zip(&lambda)
            .map(|(&c, l)| (c as f64 - l * j as f64).abs())
            .collect()
    };
    for &n in grid {
        while j < n {
            acc.add(f.eval_unchecked(&y));
            let a = iet.letter_at(&y);
            counts[a] += 1;
            y = y + iet.translation(a);
            j += 1;
            running_birkhoff = running_birkhoff.max(acc.value().to_f64().abs());
            for (r, v) in running_visits.iter_mut().zip(deviations(&counts, j)) {
                *r = r.max(v);
            }
        }
        out.push(Sample {
            birkhoff: acc.value().to_f64().abs(),
            running_birkhoff,
            visits: deviations(&counts, n),
            running_visits: running_visits.clone(),
        });
    }
    out
}

/// Sup-norm growth of Birkhoff sums and of visit-count deviations over a time grid,
/// sampled at the stratified points `x_k = (k + 1/2)/x_samples`.
///
/// `iet` must have total length 1 (the domain of `f`).
pub fn deviation_scan<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    n_grid: &[u64],
    x_samples: usize,
    exec: Exec,
) -> Result<DeviationScan> {
    if x_samples == 0 || n_grid.is_empty() {
        return Err(Error::BadConfig(
            "deviation scan needs samples and a non-empty grid".into(),
        ));
    }
    if *iet.total_length() != S::one() && (iet.total_length().to_f64() - 1.0).abs() > 1e-12 {
        return Err(Error::BadConfig(
            "deviation scan needs an IET of total length 1".into(),
        ));
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let per_x = exec.map_range(x_samples, |k| {
        let x = S::from_ratio(2 * k as i64 + 1, 2 * x_samples as i64);
        scan_one(iet, f, x, &grid)
    });
    let rows: Vec<DeviationRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let max_of =
                |g: &dyn Fn(&Sample) -> f64| per_x.iter().map(|r| g(&r[i])).fold(0.0, f64::max);
            DeviationRow {
                n,
                max_birkhoff: max_of(&|s| s.birkhoff),
                running_max_birkhoff: max_of(&|s| s.running_birkhoff),
                max_visit_deviation: (0..iet.d()).map(|a| max_of(&|s| s.visits[a])).collect(),
                running_max_visit_deviation: (0..iet.d())
                    .map(|a| max_of(&|s| s.running_visits[a]))
                    .collect(),
            }
        })
        .collect();
    let upper = &rows[rows.len() / 2..];
    let fit = |g: &dyn Fn(&DeviationRow) -> f64| {
        fit_loglog(&upper.iter().map(|r| (r.n, g(r))).collect::<Vec<_>>())
    };
    let largest = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    Ok(DeviationScan {
        x_samples,
        birkhoff_fit: fit(&|r| r.max_birkhoff),
        running_birkhoff_fit: fit(&|r| r.running_max_birkhoff),
        visit_fit: fit(&|r| largest(&r.max_visit_deviation)),
        running_visit_fit: fit(&|r| largest(&r.running_max_visit_deviation)),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Permutation;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn rotation_quarter_counts() {
        let t = Iet::new(Permutation::reversal(2), vec![q(3, 4), q(1, 4)], false).unwrap();
        assert_eq!(visit_counts(&t, &q(0, 1), 4).unwrap(), vec![3, 1]);
        assert!(visit_counts(&t, &q(1, 1), 4).is_err());
    }

    #[test]
    fn zero_cocycle_has_no_birkhoff_fit() {
        let t: Iet<f64> = Iet::golden_f64();
        let f = StepCocycle::new(vec![1.0], vec![0.0], 1.0).unwrap();
        let scan = deviation_scan(&t, &f, &log_grid(10, 10_000, 4), 8, Exec::Sequential).unwrap();
        assert!(scan.birkhoff_fit.is_none());
        assert!(scan.visit_fit.is_some());
        assert!(scan.rows.iter().all(|r| r.max_birkhoff == 0.0));
    }

    #[test]
    fn golden_visit_deviation_stays_bounded() {
        let t: Iet<f64> = Iet::golden_f64();
        let f = StepCocycle::new(vec![0.5, 0.5], vec![1.0, -1.0], 1.0).unwrap();
        let scan =
            deviation_scan(&t, &f, &log_grid(100, 100_000, 3), 16, Exec::Sequential).unwrap();
        let fit = scan.visit_fit.unwrap();
        assert!(fit.slope.abs() < 0.2, "{fit:?}");
        assert!(scan
            .rows
            .iter()
            .all(|r| r.max_visit_deviation.iter().all(|&v| v < 3.0)));
    }

    #[test]
    fn policies_agree() {
        let t: Iet<f64> = Iet::golden_f64();
        let f = StepCocycle::new(vec![0.25, 0.75], vec![3.0, -1.0], 3.0).unwrap();
        let grid = log_grid(1, 1000, 5);
        let a = deviation_scan(&t, &f, &grid, 10, Exec::Sequential).unwrap();
        let b = deviation_scan(&t, &f, &grid, 10, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(u64, f64)> = (1..20)
            .map(|k| (k * 100, 2.0 * ((k * 100) as f64).powf(0.4)))
            .collect();
        let fit = fit_loglog(&pts).unwrap();
        assert!((fit.slope - 0.4).abs() < 1e-12);
        assert!((fit.intercept - 2f64.ln()).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn counts_sum_to_n(num in 1i64..99, n in 0u64..500) {
            let t = Iet::new(Permutation::reversal(3), vec![q(num, 300), q(100, 300), q(200 - num, 300)], false).unwrap();
            let c = visit_counts(&t, &q(0, 1), n).unwrap();
            prop_assert_eq!(c.iter().sum::<u64>(), n);
        }

        #[test]
        fn crude_bound_holds(seed in 0u64..50, n_hi in 10u64..3000) {
            let t: Iet<f64> = crate::iet::sample_iet(seed, &Permutation::reversal(3), &crate::iet::SampleConfig::default());
            let f = StepCocycle::new(vec![0.2, 0.8], vec![2.0, -0.5], 2.0).unwrap();
            let scan = deviation_scan(&t.normalized(), &f, &log_grid(1, n_hi, 3), 5, Exec::Sequential).unwrap();
            for r in &scan.rows {
                prop_assert!(r.running_max_birkhoff <= 2.0 * r.n as f64 + 1e-9);
                prop_assert!(r.max_birkhoff <= r.running_max_birkhoff);
            }
        }

        #[test]
        fn grid_is_sorted_and_bounded(lo in 1u64..1000, span in 0u64..1_000_000, per in 1usize..10) {
            let g = log_grid(lo, lo + span, per);
            prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(g[0], lo);
            prop_assert_eq!(*g.last().unwrap(), lo + span);
        }
    }
}
