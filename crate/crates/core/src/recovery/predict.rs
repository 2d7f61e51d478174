use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{DecompositionReport, HalfInteger, IrrepLabel, Parity};
use crate::error::{Error, Result};
use crate::family::ModelKind;

/// Recovery outcome of a sector: all states recoverable, none, or some.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    O,
    X,
    OX,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::O
        } else {
            Outcome::X
        }
    }

    /// Verdict of a set of observed ranks against the full rank `n`.
    pub fn from_ranks<'a>(ranks: impl IntoIterator<Item = &'a usize>, n: usize) -> Self {
        let (mut hit, mut miss) = (false, false);
        for &r in ranks {
            if r == n {
                hit = true;
            } else {
                miss = true;
            }
        }
        match (hit, miss) {
            (true, false) => Outcome::O,
            (true, true) => Outcome::OX,
            _ => Outcome::X,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::O => "O",
            Outcome::X => "X",
            Outcome::OX => "OX",
        })
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(Outcome::O),
            "X" => Ok(Outcome::X),
            "OX" => Ok(Outcome::OX),
            _ => Err(Error::Parse {
                kind: "outcome",
                value: s.to_string(),
            }),
        }
    }
}

fn expect_model(report: &DecompositionReport, model: ModelKind) -> Result<()> {
    if report.model != model {
        return Err(Error::ModelMismatch {
            expected: model.name(),
            got: report.model.name(),
        });
    }
    Ok(())
}

fn absent(sites: usize, sector: impl fmt::Display) -> Error {
    Error::SectorAbsent {
        sites,
        sector: sector.to_string(),
    }
}

/// Parity under Π_x of the `m = 0` state of a spin-`S` multiplet on `L` sites.
pub fn zero_component_parity(sites: usize, spin: HalfInteger) -> Parity {
    if (sites as i64 / 2 + spin.twice() / 2) % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// `O` iff `ν_S ≥ L − 1`.
pub fn predict_xxx(report: &DecompositionReport, spin: HalfInteger) -> Result<Outcome> {
    expect_model(report, ModelKind::Xxx)?;
    let nu = report
        .multiplicity(&IrrepLabel::spin(spin))
        .ok_or_else(|| absent(report.sites, format!("S={spin}")))?;
    Ok(Outcome::from_bool(nu >= ModelKind::Xxx.term_count(report.sites)))
}

/// `O` iff `ν_p ≥ 2(L − 1)`.
pub fn predict_xxz(report: &DecompositionReport, label: &IrrepLabel) -> Result<Outcome> {
    expect_model(report, ModelKind::Xxz)?;
    let nu = report.multiplicity(label).ok_or_else(|| absent(report.sites, label))?;
    Ok(Outcome::from_bool(nu >= ModelKind::Xxz.term_count(report.sites)))
}

/// Necessary condition for an XXX eigenstate of spin `S` to fix the XXZ
/// couplings: `Σ_{|m| ≤ S} ν_{|m|} ≥ 2(L − 1)`, where the `m = 0` term counts
/// only the parity sector the multiplet's `m = 0` state lives in.
pub fn predict_accidental(xxz: &DecompositionReport, spin: HalfInteger) -> Result<Outcome> {
    expect_model(xxz, ModelKind::Xxz)?;
    let sites = xxz.sites;
    if spin.twice() < 0 || spin.twice() > sites as i64 || (sites as i64 - spin.twice()) % 2 != 0 {
        return Err(absent(sites, format!("S={spin}")));
    }
    let mut total = 0;
    let mut m = spin;
    while m.twice() >= 0 {
        let label = if m.twice() == 0 {
            IrrepLabel::magnetization(m, Some(zero_component_parity(sites, spin)))
        } else {
            IrrepLabel::magnetization(m, None)
        };
        total += xxz.multiplicity(&label).ok_or_else(|| absent(sites, label))?;
        m = HalfInteger::from_twice(m.twice() - 2);
    }
    Ok(Outcome::from_bool(total >= ModelKind::Xxz.term_count(sites)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::decomposition_report;
    use crate::tolerance::Tolerances;

    fn h(twice: i64) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    #[test]
    fn outcome_from_rank_sets() {
        assert_eq!(Outcome::from_ranks(&[3, 3], 3), Outcome::O);
        assert_eq!(Outcome::from_ranks(&[1, 3], 3), Outcome::OX);
        assert_eq!(Outcome::from_ranks(&[1, 2], 3), Outcome::X);
        assert_eq!("OX".parse::<Outcome>().unwrap(), Outcome::OX);
    }

    #[test]
    fn xxx_predictions() {
        let tol = Tolerances::default();
        let r5 = decomposition_report(ModelKind::Xxx, 5, &tol).unwrap();
        assert_eq!(predict_xxx(&r5, h(3)).unwrap(), Outcome::O);
        let r7 = decomposition_report(ModelKind::Xxx, 7, &tol).unwrap();
        assert_eq!(predict_xxx(&r7, h(7)).unwrap(), Outcome::X);
        let r4 = decomposition_report(ModelKind::Xxx, 4, &tol).unwrap();
        assert_eq!(predict_xxx(&r4, h(0)).unwrap(), Outcome::X);
        assert!(matches!(predict_xxx(&r4, h(1)), Err(Error::SectorAbsent { .. })));
    }

    #[test]
    fn xxz_predictions() {
        let tol = Tolerances::default();
        let r5 = decomposition_report(ModelKind::Xxz, 5, &tol).unwrap();
        assert_eq!(
            predict_xxz(&r5, &IrrepLabel::magnetization(h(1), None)).unwrap(),
            Outcome::O
        );
        let r6 = decomposition_report(ModelKind::Xxz, 6, &tol).unwrap();
        for p in [Parity::Even, Parity::Odd] {
            assert_eq!(
                predict_xxz(&r6, &IrrepLabel::magnetization(h(0), Some(p))).unwrap(),
                Outcome::O
            );
        }
        let r3 = decomposition_report(ModelKind::Xxz, 3, &tol).unwrap();
        assert_eq!(
            predict_xxz(&r3, &IrrepLabel::magnetization(h(1), None)).unwrap(),
            Outcome::X
        );
        assert!(matches!(predict_xxx(&r3, h(1)), Err(Error::ModelMismatch { .. })));
    }

    #[test]
    fn accidental_predictions() {
        let tol = Tolerances::default();
        let r4 = decomposition_report(ModelKind::Xxz, 4, &tol).unwrap();
        assert_eq!(predict_accidental(&r4, h(2)).unwrap(), Outcome::O);
        let r2 = decomposition_report(ModelKind::Xxz, 2, &tol).unwrap();
        assert_eq!(predict_accidental(&r2, h(0)).unwrap(), Outcome::X);
        let r3 = decomposition_report(ModelKind::Xxz, 3, &tol).unwrap();
        assert_eq!(predict_accidental(&r3, h(3)).unwrap(), Outcome::O);
        assert!(predict_accidental(&r3, h(2)).is_err());
    }

    #[test]
    fn two_site_parities() {
        assert_eq!(zero_component_parity(2, h(0)), Parity::Odd);
        assert_eq!(zero_component_parity(2, h(2)), Parity::Even);
    }
}
