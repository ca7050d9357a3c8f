//! Empirical diagnostics for skew products: fiber histograms over vertical
//! windows, shift probes against translation invariance, and occupation
//! measures of the induced map on a band of the strip.
//!
//! Orbits run in any scalar type; positions and fiber coordinates are binned
//! as floats. Birkhoff sums use the scalar's accumulator, which is
//! compensated for `f64`.

use serde::Serialize;

use crate::cocycle::{coboundary, strip_first_return, StepCocycle, StepFunction, StripPoint};
use crate::error::{Error, Result};
use crate::iet::{Iet, Permutation};
use crate::par::Exec;
use crate::scalar::{Accumulator, Scalar};

/// Shifts closer than this (in bin widths) to a whole number of bins are not rebinned.
const WHOLE_BIN_TOL: f64 = 1e-9;

/// Histogram of fiber coordinates `t ∈ [−L, L]` over one window `[a, b)` of the base.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberHistogram {
    pub window: usize,
    pub x_range: (f64, f64),
    pub half_width: f64,
    pub counts: Vec<u64>,
    /// Visits counted in `counts`.
    pub total: u64,
    /// Visits to the window with `|t| > L`.
    pub outside: u64,
}

impl FiberHistogram {
    fn empty(window: usize, x_range: (f64, f64), half_width: f64, bins: usize) -> Self {
        FiberHistogram {
            window,
            x_range,
            half_width,
            counts: vec![0; bins],
            total: 0,
            outside: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.half_width / self.bins() as f64
    }

    fn record(&mut self, t: f64) {
        if t.abs() > self.half_width || t.is_nan() {
            self.outside += 1;
            return;
        }
        let b = (((t + self.half_width) / self.bin_width()) as usize).min(self.bins() - 1);
        self.counts[b] += 1;
        self.total += 1;
    }

    /// Counts divided by the total; all zeros for an empty histogram.
    pub fn normalized(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.bins()];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    /// Adds the counts of a histogram over the same window and grid.
    pub fn merge(&mut self, other: &FiberHistogram) -> Result<()> {
        if self.window != other.window
            || self.bins() != other.bins()
            || self.half_width != other.half_width
        {
            return Err(Error::BadConfig(
                "histograms live on different grids".into(),
            ));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
        self.outside += other.outside;
        Ok(())
    }
}

/// Visits of the skew orbit of `(x0, 0)` during `n` steps, the start
/// included, bucketed by windows of width `window_width` tiling `[0, 1)`
/// and by `bins` bins of `[−L, L]` inside each window.
pub fn fiber_histograms<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    x0: &S,
    n: u64,
    window_width: f64,
    half_width: f64,
    bins: usize,
) -> Result<Vec<FiberHistogram>> {
    if !(window_width > 0.0 && window_width <= 1.0)
        || half_width.is_nan()
        || half_width <= 0.0
        || bins == 0
    {
        return Err(Error::BadConfig(format!(
            "need 0 < window width ≤ 1, L > 0 and bins > 0 (got {window_width}, {half_width}, {bins})"
        )));
    }
    if !iet.contains(x0) {
        return Err(Error::OutOfDomain {
            value: x0.to_exact_string(),
            bound: iet.total_length().to_exact_string(),
        });
    }
    let windows = (1.0 / window_width - 1e-9).ceil() as usize;
    let mut out: Vec<FiberHistogram> = (0..windows)
        .map(|w| {
            let lo = w as f64 * window_width;
            FiberHistogram::empty(w, (lo, (lo + window_width).min(1.0)), half_width, bins)
        })
        .collect();
    let mut x = x0.clone();
    let mut acc = S::Acc::default();
    for _ in 0..n {
        let w = ((x.to_f64() / window_width) as usize).min(windows - 1);
        out[w].record(acc.value().to_f64());
        acc.add(f.eval_unchecked(&x));
        x = iet.apply_unchecked(&x);
    }
    Ok(out)
}

/// Fiber histograms of several independent orbits, merged window by window.
#[allow(clippy::too_many_arguments)]
pub fn fiber_histograms_merged<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    starts: &[S],
    n: u64,
    window_width: f64,
    half_width: f64,
    bins: usize,
    exec: Exec,
) -> Result<Vec<FiberHistogram>> {
    let runs = exec.map(starts, |x0| {
        fiber_histograms(iet, f, x0, n, window_width, half_width, bins)
    });
    let mut merged: Option<Vec<FiberHistogram>> = None;
    for run in runs {
        let run = run?;
        match merged.as_mut() {
            None => merged = Some(run),
            Some(m) => {
                for (a, b) in m.iter_mut().zip(&run) {
                    a.merge(b)?;
                }
            }
        }
    }
    merged.ok_or_else(|| Error::BadConfig("no starting points".into()))
}

/// `‖p − V_s p‖₁` for a normalized histogram `p` with the given bin width,
/// where `V_s` moves mass by `s`. Mass is not truncated at the ends of the
/// grid. A shift that is not a whole number of bins splits each bin linearly
/// between its two target bins; the flag reports that this happened.
pub fn shift_distance(p: &[f64], bin_width: f64, shift: f64) -> (f64, bool) {
    let s = shift / bin_width;
    let mut k = s.floor();
    let mut frac = s - k;
    if frac > 1.0 - WHOLE_BIN_TOL {
        k += 1.0;
        frac = 0.0;
    }
    let rebinned = frac > WHOLE_BIN_TOL;
    if !rebinned {
        frac = 0.0;
    }
    let k = k as i64;
    let b = p.len() as i64;
    let lo = k.min(0);
    let hi = (b + k + 1).max(b);
    let mut q = vec![0.0; (hi - lo) as usize];
    for (i, &m) in p.iter().enumerate() {
        let j = i as i64 + k - lo;
        q[j as usize] += (1.0 - frac) * m;
        q[j as usize + 1] += frac * m;
    }
    let dist = q
        .iter()
        .enumerate()
        .map(|(j, &qj)| {
            let i = j as i64 + lo;
            let pj = if (0..b).contains(&i) {
                p[i as usize]
            } else {
                0.0
            };
            (pj - qj).abs()
        })
        .sum();
    (dist, rebinned)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    pub shift: f64,
    /// Distance per window; empty windows report 0.
    pub per_window: Vec<f64>,
    /// Mean of the window distances weighted by window mass.
    pub aggregate: f64,
    pub rebinned: bool,
}

/// Compares every window's histogram with its translate by `shift`.
pub fn probe_shift(histograms: &[FiberHistogram], shift: f64) -> ShiftReport {
    let mut rebinned = false;
    let mut weighted = 0.0;
    let mut mass = 0u64;
    let per_window = histograms
        .iter()
        .map(|h| {
            if h.total == 0 {
                return 0.0;
            }
            let (d, r) = shift_distance(&h.normalized(), h.bin_width(), shift);
            rebinned |= r;
            weighted += d * h.total as f64;
            mass += h.total;
            d
        })
        .collect();
    let aggregate = if mass == 0 {
        0.0
    } else {
        weighted / mass as f64
    };
    ShiftReport {
        shift,
        per_window,
        aggregate,
        rebinned,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeConfig {
    /// Starting points of the merged orbits.
    pub starts: Vec<f64>,
    /// Steps per orbit.
    pub n: u64,
    pub windows: usize,
    pub bins: usize,
    /// `L`; defaults to `8·m·M` when absent.
    pub half_width: Option<f64>,
    /// Shifts to probe; defaults to the nonzero jumps of the cocycle.
    pub shifts: Option<Vec<f64>>,
    pub exec: Exec,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            starts: vec![0.1, 0.3, 0.5, 0.7],
            n: 100_000,
            windows: 64,
            bins: 256,
            half_width: None,
            shifts: None,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub half_width: f64,
    pub visits: u64,
    /// Fraction of visits with `|t| > L`.
    pub outside_fraction: f64,
    pub shifts: Vec<ShiftReport>,
    /// Mean of the per-shift aggregates.
    pub aggregate: f64,
}

/// Default `L = 8·m·M`, floored at 1 for cocycles with a single discontinuity of tiny size.
pub fn default_half_width<S: Scalar>(f: &StepCocycle<S>) -> f64 {
    (8.0 * f.m() as f64 * f.bound().to_f64()).max(1.0)
}

/// Fiber histograms of the merged orbits, probed with each shift.
pub fn translation_invariance_probe(
    iet: &Iet<f64>,
    f: &StepCocycle<f64>,
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if cfg.windows == 0 {
        return Err(Error::BadConfig("need at least one window".into()));
    }
    let half_width = cfg.half_width.unwrap_or_else(|| default_half_width(f));
    let hists = fiber_histograms_merged(
        iet,
        f,
        &cfg.starts,
        cfg.n,
        1.0 / cfg.windows as f64,
        half_width,
        cfg.bins,
        cfg.exec,
    )?;
    let shifts = cfg
        .shifts
        .clone()
        .unwrap_or_else(|| f.jumps().sigma.into_iter().filter(|s| *s != 0.0).collect());
    if shifts.is_empty() {
        return Err(Error::BadConfig(
            "nothing to probe: the cocycle has no nonzero jumps".into(),
        ));
    }
    let reports: Vec<ShiftReport> = shifts.iter().map(|&s| probe_shift(&hists, s)).collect();
    let visits: u64 = hists.iter().map(|h| h.total + h.outside).sum();
    let outside: u64 = hists.iter().map(|h| h.outside).sum();
    let aggregate = reports.iter().map(|r| r.aggregate).sum::<f64>() / reports.len() as f64;
    Ok(ProbeReport {
        half_width,
        visits,
        outside_fraction: if visits == 0 {
            0.0
        } else {
            outside as f64 / visits as f64
        },
        shifts: reports,
        aggregate,
    })
}

/// Occupation histogram of the induced map on `[0, 1) × [−N, N]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalBirkhoffMeasure {
    pub start: (f64, f64),
    pub band: f64,
    pub returns: u64,
    /// Steps of the skew product spent over all returns.
    pub steps: u64,
    pub x_bins: usize,
    pub t_bins: usize,
    /// Row-major: `counts[i * t_bins + j]` for x-bin `i`, t-bin `j`.
    pub counts: Vec<u64>,
    /// Smallest and largest fiber coordinate among the returned points.
    pub t_extent: (f64, f64),
}

impl EmpiricalBirkhoffMeasure {
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.returns.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Mass of the x-bin `i` row.
    pub fn row_mass(&self, i: usize) -> f64 {
        self.counts[i * self.t_bins..(i + 1) * self.t_bins]
            .iter()
            .sum::<u64>() as f64
            / self.returns.max(1) as f64
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.counts.len() != other.counts.len() || self.band != other.band {
            return Err(Error::BadConfig("measures live on different grids".into()));
        }
        Ok(self
            .normalized()
            .iter()
            .zip(other.normalized())
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// Iterates the first-return map to the band `|t| ≤ N` `n_returns` times
/// from `p0` and records the returned points on an `x_bins × t_bins` grid.
pub fn empirical_birkhoff_measure<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    p0: &StripPoint<S>,
    band: &S,
    n_returns: u64,
    (x_bins, t_bins): (usize, usize),
    cap: u64,
) -> Result<EmpiricalBirkhoffMeasure> {
    if x_bins == 0 || t_bins == 0 || *band <= S::zero() {
        return Err(Error::BadConfig(
            "need a positive band and a non-empty grid".into(),
        ));
    }
    let n = band.to_f64();
    let mut counts = vec![0u64; x_bins * t_bins];
    let mut p = p0.clone();
    let mut steps = 0u64;
    let mut extent = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..n_returns {
        let (next, k) = strip_first_return(iet, f, &p, band, cap)?;
        steps += k;
        let (x, t) = (next.x.to_f64(), next.t.to_f64());
        extent = (extent.0.min(t), extent.1.max(t));
        let i = ((x * x_bins as f64) as usize).min(x_bins - 1);
        let j = (((t + n) / (2.0 * n) * t_bins as f64) as usize).min(t_bins - 1);
        counts[i * t_bins + j] += 1;
        p = next;
    }
    Ok(EmpiricalBirkhoffMeasure {
        start: (p0.x.to_f64(), p0.t.to_f64()),
        band: n,
        returns: n_returns,
        steps,
        x_bins,
        t_bins,
        counts,
        t_extent: extent,
    })
}

/// A base, a cocycle and the run length the diagnostics are calibrated at.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub iet: Iet<f64>,
    pub f: StepCocycle<f64>,
    /// For coboundaries, `g` with `f = g∘T − g`.
    pub transfer: Option<StepFunction<f64>>,
    pub probe: ProbeConfig,
}

/// Coboundary over the golden rotation: `f = g∘T − g` for a three-step `g`
/// whose values are rationally independent, so that translates of the
/// fiber distributions by the jumps of `f` barely overlap.
pub fn coboundary_fixture() -> Result<Fixture> {
    let iet = Iet::golden_f64();
    let g = StepFunction::new(
        vec![0.0, 0.31, 0.67],
        vec![0.0, 1.0, std::f64::consts::SQRT_2],
    )?;
    let f = coboundary(&iet, &g)?;
    Ok(Fixture {
        iet,
        f,
        transfer: Some(g),
        probe: ProbeConfig {
            n: 100_000,
            half_width: Some(4.0),
            ..Default::default()
        },
    })
}

/// Self-similar reversal base on four intervals with a cocycle sampled from
/// seed 7 (`m = 2`, `M = 1`). Its Birkhoff sums spread like `n^{θ₂/θ₁}`,
/// which flattens the fiber histograms within the run length.
pub fn generic_fixture() -> Result<Fixture> {
    let iet = Iet::self_similar_reversal4().to_f64();
    debug_assert_eq!(iet.perm(), &Permutation::reversal(4));
    let f = crate::cocycle::sample_cocycle::<f64>(7, 2, &1.0)?;
    Ok(Fixture {
        iet,
        f,
        transfer: None,
        probe: ProbeConfig {
            n: 1_000_000,
            ..Default::default()
        },
    })
}
