use num_bigint::BigInt;
use serde::Serialize;

use super::intervals::IntervalSet;
use super::search::{
    check_d, good_return_search, verify_good_return, GoodReturn, GoodReturnBounds, SearchConfig,
    SearchStats, Verification,
};
use super::times::{balanced_times_with, BalancedTimesConfig, ReturnRule};
use crate::cocycle::{CocycleDescriptor, StepCocycle};
use crate::error::{Error, Result};
use crate::iet::{Iet, IetDescriptor};
use crate::renorm::ser_bigint;
use crate::scalar::Scalar;

/// Selected balanced time as recorded in a certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowRecord {
    pub k: usize,
    pub rauzy_index: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub h: BigInt,
}

/// Everything needed to rerun and re-check a good return.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Certificate<S> {
    pub iet: IetDescriptor,
    pub cocycle: CocycleDescriptor,
    pub query_set: IntervalSet<S>,
    pub birkhoff_bound: String,
    #[serde(serialize_with = "ser_bigint")]
    pub n_min: BigInt,
    pub eta: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub return_rule: ReturnRule,
    pub balanced_times: Vec<WindowRecord>,
    pub bounds: GoodReturnBounds,
    pub good_return: GoodReturn<S>,
    pub search: SearchStats,
    pub verification: Verification,
}

/// Inputs of [`certify`] other than the base and the cocycle.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifyRequest<S> {
    pub query_set: IntervalSet<S>,
    pub birkhoff_bound: S,
    pub n_min: BigInt,
    pub eta: f64,
    pub epsilon: f64,
    /// Zorich blocks scanned for returns to the balanced domain.
    pub budget: usize,
    pub times: BalancedTimesConfig,
    pub search: SearchConfig,
}

/// Balanced times, a good-return search, and an independent re-check of the
/// hit. Fails if the re-check disagrees with the search.
pub fn certify<S: Scalar>(
    iet: &Iet<S>,
    f: &StepCocycle<S>,
    req: &CertifyRequest<S>,
) -> Result<Certificate<S>> {
    check_d(f, &req.birkhoff_bound)?;
    let iet = iet.normalized();
    let bt = balanced_times_with(&iet, req.epsilon, req.eta, req.budget, &req.times)?;
    let found = good_return_search(
        &iet,
        f,
        &req.query_set,
        &req.birkhoff_bound,
        &req.n_min,
        &bt,
        &req.search,
    )?;
    let bounds = GoodReturnBounds::from_times(&bt);
    let verification = verify_good_return(
        &iet,
        f,
        &req.query_set,
        &req.birkhoff_bound,
        &req.n_min,
        &bounds,
        &found.hit,
        &req.search,
    )?;
    if !verification.passed() {
        return Err(Error::NotFoundWithinBudget {
            what: "verified good return".into(),
            stats: format!("re-check failed: {verification:?}"),
        });
    }
    Ok(Certificate {
        iet: IetDescriptor::from_iet(&iet),
        cocycle: CocycleDescriptor::from_cocycle(f),
        query_set: req.query_set.clone(),
        birkhoff_bound: req.birkhoff_bound.to_exact_string(),
        n_min: req.n_min.clone(),
        eta: req.eta,
        epsilon: req.epsilon,
        seed: req.search.seed,
        return_rule: bt.rule,
        balanced_times: bt
            .sequence
            .iter()
            .map(|t| WindowRecord {
                k: t.k,
                rauzy_index: t.rauzy_index,
                h: t.h.clone(),
            })
            .collect(),
        bounds,
        good_return: found.hit,
        search: found.stats,
        verification,
    })
}
