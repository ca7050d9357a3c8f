//! Loading of IETs, cocycles and interval sets from flags.

use std::path::Path;

use iet_skew::cocycle::{sample_cocycle, CocycleDescriptor, StepCocycle};
use iet_skew::iet::IetDescriptor;
use iet_skew::io::read_json;
use iet_skew::{Error, Iet, Mode, QuadSqrt5, Result, Scalar};

/// Names accepted by `--iet` in place of a file.
pub const BUILTIN_IETS: &[&str] = &["golden", "self-similar-4"];

/// The IET descriptor behind `--iet`: a builtin name or a JSON file.
pub fn iet_descriptor(spec: &str) -> Result<IetDescriptor> {
    match spec {
        "golden" => Ok(IetDescriptor::from_iet(&Iet::<QuadSqrt5>::golden())),
        "self-similar-4" => Ok(IetDescriptor::from_iet(
            &Iet::<QuadSqrt5>::self_similar_reversal4(),
        )),
        path if Path::new(path).exists() => read_json(Path::new(path)),
        other => Err(Error::BadConfig(format!(
            "--iet {other}: no such file and not one of {}",
            BUILTIN_IETS.join(", ")
        ))),
    }
}

/// Builds the IET in `S`. Quadratic lengths are evaluated numerically when
/// `S` is the float type; any other change of field must be representable.
pub fn build_iet<S: Scalar>(desc: &IetDescriptor) -> Result<Iet<S>> {
    if S::MODE == Mode::Float && desc.mode == Mode::Quadratic {
        let exact = desc.build::<QuadSqrt5>()?;
        let lambda = exact
            .lambda()
            .iter()
            .map(|l| S::from_f64(l.to_f64()))
            .collect();
        return Iet::new(exact.perm().clone(), lambda, desc.normalize);
    }
    desc.build::<S>()
}

/// How `--cocycle` names a cocycle.
#[derive(Clone, Debug, PartialEq)]
pub enum CocycleSource {
    File(CocycleDescriptor),
    /// `sample:SEED[:m[:M]]`, drawn with the seeded sampler.
    Sample {
        seed: u64,
        m: usize,
        bound: String,
    },
}

pub fn cocycle_source(spec: &str) -> Result<CocycleSource> {
    if let Some(rest) = spec.strip_prefix("sample:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || Error::BadConfig(format!("--cocycle {spec}: expected sample:SEED[:m[:M]]"));
        if parts.is_empty() || parts.len() > 3 {
            return Err(bad());
        }
        let seed = parts[0].parse().map_err(|_| bad())?;
        let m = parts
            .get(1)
            .map_or(Ok(2), |s| s.parse())
            .map_err(|_| bad())?;
        let bound = parts.get(2).unwrap_or(&"1").to_string();
        return Ok(CocycleSource::Sample { seed, m, bound });
    }
    if !Path::new(spec).exists() {
        return Err(Error::BadConfig(format!("--cocycle {spec}: no such file")));
    }
    read_json(Path::new(spec)).map(CocycleSource::File)
}

pub fn build_cocycle<S: Scalar>(src: &CocycleSource) -> Result<StepCocycle<S>> {
    match src {
        CocycleSource::File(desc) => desc.build(),
        CocycleSource::Sample { seed, m, bound } => {
            sample_cocycle(*seed, *m, &S::parse_literal(bound)?)
        }
    }
}

/// Parses a `lo:hi` range of positive integers written as `1e5` or `100000`.
pub fn parse_range(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::BadConfig(format!("range {s}: expected LO:HI"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let (lo, hi) = (parse_count(lo)?, parse_count(hi)?);
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Integer counts accept scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::BadConfig(format!("{s}: not a count")))?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(Error::BadConfig(format!("{s}: not a count")));
    }
    Ok(v as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use iet_skew::Rational;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e5").unwrap(), 100_000);
        assert_eq!(parse_count("42").unwrap(), 42);
        assert!(parse_count("1.5").is_err());
        assert_eq!(parse_range("1e2:1e5").unwrap(), (100, 100_000));
        assert!(parse_range("10:1").is_err());
    }

    #[test]
    fn sample_spec_defaults() {
        assert_eq!(
            cocycle_source("sample:7").unwrap(),
            CocycleSource::Sample {
                seed: 7,
                m: 2,
                bound: "1".into()
            }
        );
        assert!(cocycle_source("sample:x").is_err());
    }

    #[test]
    fn quadratic_builtin_loads_as_float_but_not_rational() {
        let desc = iet_descriptor("golden").unwrap();
        let f = build_iet::<f64>(&desc).unwrap();
        assert!((f.lambda()[0] - 0.618_033_988_749_895).abs() < 1e-15);
        assert!(build_iet::<Rational>(&desc).is_err());
    }
}
