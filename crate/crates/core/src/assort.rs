//! Assorter arithmetic for ballot-level comparison audits.
//!
//! A comparison audit checks each sampled ballot's manual interpretation
//! (MVR) against the machine's cast-vote record (CVR). For a plurality
//! contest the assorter scores an interpretation as 1 (reported winner),
//! 0 (reported loser), or 1/2 (anything else). The audited population is
//! the list of *overstatement assorters*
//!
//! ```text
//! x = (1 - ω) / (2 - v),    ω = A(cvr) - A(mvr),
//! ```
//!
//! where `v` is the diluted margin. The reported outcome is correct iff
//! the population mean of `x` exceeds 1/2, so the audit tests the
//! complementary null `mean ≤ 1/2`.
//!
//! Ignoring understatements, the population has three points of support:
//! `a = 1/(2 - v)` on correct CVRs, `a/2` on 1-vote overstatements, and
//! `0` on 2-vote overstatements, with rates `p0`, `p1`, `p2`.

use crate::error::{AuditError, Result};

/// Contest parameters a comparison audit needs: the diluted margin `v`,
/// the number of ballots `N`, and the risk limit `α`.
///
/// Derived constants: `a = 1/(2 - v)` (assorter value on a correct CVR,
/// always in (1/2, 1]) and the population upper bound `u = 2a` (the value
/// of a 2-vote understatement).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContestSpec {
    diluted_margin: f64,
    population_size: u64,
    risk_limit: f64,
}

impl ContestSpec {
    pub fn new(diluted_margin: f64, population_size: u64, risk_limit: f64) -> Result<Self> {
        if !diluted_margin.is_finite() || diluted_margin <= 0.0 || diluted_margin > 1.0 {
            return Err(AuditError::input(
                "diluted_margin",
                format!("{diluted_margin} is not in (0, 1]"),
            ));
        }
        if population_size == 0 {
            return Err(AuditError::input("population_size", "must be at least 1"));
        }
        if !risk_limit.is_finite() || risk_limit <= 0.0 || risk_limit >= 1.0 {
            return Err(AuditError::input(
                "risk_limit",
                format!("{risk_limit} is not in (0, 1)"),
            ));
        }
        Ok(Self {
            diluted_margin,
            population_size,
            risk_limit,
        })
    }

    pub fn diluted_margin(&self) -> f64 {
        self.diluted_margin
    }

    pub fn population_size(&self) -> u64 {
        self.population_size
    }

    pub fn risk_limit(&self) -> f64 {
        self.risk_limit
    }

    /// Assorter value on an error-free CVR: `a = 1/(2 - v)`.
    pub fn noerror(&self) -> f64 {
        1.0 / (2.0 - self.diluted_margin)
    }

    /// Upper bound of the overstatement-assorter population: `u = 2a`.
    pub fn upper_bound(&self) -> f64 {
        2.0 * self.noerror()
    }
}

/// A pair of overstatement rates `(p1, p2)`; the correct-CVR rate is the
/// complement `p0 = 1 - p1 - p2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    p1: f64,
    p2: f64,
}

impl RatePair {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !p1.is_finite() || p1 < 0.0 {
            return Err(AuditError::input("p1", format!("{p1} is negative")));
        }
        if !p2.is_finite() || p2 < 0.0 {
            return Err(AuditError::input("p2", format!("{p2} is negative")));
        }
        if p1 + p2 > 1.0 {
            return Err(AuditError::input(
                "p1 + p2",
                format!("{} exceeds 1", p1 + p2),
            ));
        }
        Ok(Self { p1, p2 })
    }

    /// Error-free rates `(0, 0)`.
    pub fn zero() -> Self {
        Self { p1: 0.0, p2: 0.0 }
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1 - self.p2
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// Whether these rates are consistent with a correct reported outcome.
    ///
    /// The alternative requires `a·p2 + (a/2)·p1 < a - 1/2`. Dividing by
    /// `a` and substituting `a = 1/(2 - v)` reduces the hyperplane to
    /// `p1 + 2·p2 < v`, which is the form evaluated here (it avoids the
    /// cancellation in `a - 1/2` when grid points land exactly on the
    /// boundary).
    pub fn is_feasible(&self, spec: &ContestSpec) -> bool {
        self.p1 + 2.0 * self.p2 < spec.diluted_margin()
    }
}

/// How a single ballot comparison came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonKind {
    /// CVR and MVR assorters agree (`ω = 0`).
    Correct,
    /// 1-vote overstatement (`ω = 1/2`).
    OneVoteOver,
    /// 2-vote overstatement (`ω = 1`).
    TwoVoteOver,
    /// Understatement (`ω < 0`): error in the winner's disfavor.
    Understatement,
}

/// One row of audit data: a ballot identifier plus the assorter values
/// computed from the CVR and from the manual interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    ballot_id: String,
    cvr_assort: f64,
    mvr_assort: f64,
}

fn check_assort_value(field: &'static str, value: f64) -> Result<()> {
    if value == 0.0 || value == 0.5 || value == 1.0 {
        Ok(())
    } else {
        Err(AuditError::input(
            field,
            format!("{value} is not one of 0, 0.5, 1"),
        ))
    }
}

impl ComparisonRecord {
    pub fn new(ballot_id: impl Into<String>, cvr_assort: f64, mvr_assort: f64) -> Result<Self> {
        check_assort_value("cvr_assort", cvr_assort)?;
        check_assort_value("mvr_assort", mvr_assort)?;
        Ok(Self {
            ballot_id: ballot_id.into(),
            cvr_assort,
            mvr_assort,
        })
    }

    pub fn ballot_id(&self) -> &str {
        &self.ballot_id
    }

    pub fn cvr_assort(&self) -> f64 {
        self.cvr_assort
    }

    pub fn mvr_assort(&self) -> f64 {
        self.mvr_assort
    }

    /// Overstatement `ω = A(cvr) - A(mvr)`, one of {-1, -1/2, 0, 1/2, 1}.
    pub fn overstatement(&self) -> f64 {
        self.cvr_assort - self.mvr_assort
    }

    pub fn kind(&self) -> ComparisonKind {
        let omega = self.overstatement();
        if omega == 0.0 {
            ComparisonKind::Correct
        } else if omega == 0.5 {
            ComparisonKind::OneVoteOver
        } else if omega == 1.0 {
            ComparisonKind::TwoVoteOver
        } else {
            ComparisonKind::Understatement
        }
    }
}

/// Three-point support for the generalized bet optimizer: assorter values
/// `z0 > z1 > z2 ≥ 0` (correct, 1-vote overstatement, 2-vote overstatement)
/// and the null-mean boundary `t` with `z2 ≤ t < z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportSpec {
    values: [f64; 3],
    threshold: f64,
}

impl SupportSpec {
    pub fn new(values: [f64; 3], threshold: f64) -> Result<Self> {
        let [z0, z1, z2] = values;
        if !(z0.is_finite() && z1.is_finite() && z2.is_finite()) || !(z0 > z1 && z1 > z2) {
            return Err(AuditError::input(
                "values",
                format!("support must be strictly decreasing, got [{z0}, {z1}, {z2}]"),
            ));
        }
        if z2 < 0.0 {
            return Err(AuditError::input("values", format!("z2 = {z2} is negative")));
        }
        if !threshold.is_finite() || threshold < z2 || threshold >= z0 {
            return Err(AuditError::input(
                "threshold",
                format!("{threshold} is not in [z2, z0) = [{z2}, {z0})"),
            ));
        }
        Ok(Self { values, threshold })
    }

    /// Plurality support `(a, a/2, 0)` tested against `t = 1/2`.
    pub fn plurality(spec: &ContestSpec) -> Self {
        let a = spec.noerror();
        Self {
            values: [a, 0.5 * a, 0.0],
            threshold: 0.5,
        }
    }

    /// Support for a supermajority contest requiring fraction `f` of valid
    /// votes to win. Overstatement assorters for such a contest sit at
    /// `a`, `(3/2 - 1/(2f))·a`, and `(1 - 1/(2f))·a`; shifting everything
    /// down by `s = (1 - 1/(2f))·a` restores a lower bound of 0, and the
    /// null boundary shifts to `t = 1/2 - s`.
    ///
    /// Requires `f ∈ (1/2, 1)`: at `f = 1` the correct and 1-vote values
    /// coincide and the support degenerates to two points.
    pub fn supermajority(f: f64, spec: &ContestSpec) -> Result<Self> {
        if !f.is_finite() || f <= 0.5 || f >= 1.0 {
            return Err(AuditError::input(
                "supermajority_fraction",
                format!("{f} is not in (1/2, 1)"),
            ));
        }
        let a = spec.noerror();
        let shift = (1.0 - 1.0 / (2.0 * f)) * a;
        let z0 = a - shift;
        let z1 = (1.5 - 1.0 / (2.0 * f)) * a - shift;
        let threshold = 0.5 - shift;
        Self::new([z0, z1, 0.0], threshold)
    }

    /// Support values `[z0, z1, z2]`, strictly decreasing.
    pub fn values(&self) -> [f64; 3] {
        self.values
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Mean of the support under `probs`, used to check the alternative.
    pub fn mean(&self, probs: [f64; 3]) -> f64 {
        self.values
            .iter()
            .zip(probs.iter())
            .map(|(z, p)| z * p)
            .sum()
    }
}

/// Overstatement assorter `x = (1 - ω)/(2 - v)` for one comparison.
///
/// Correct CVRs map to `a`, 1-vote overstatements to `a/2`, 2-vote
/// overstatements to `0`; understatements land in `(a, 2a]`.
pub fn overstatement_assorter(rec: &ComparisonRecord, spec: &ContestSpec) -> f64 {
    (1.0 - rec.overstatement()) / (2.0 - spec.diluted_margin())
}

/// Population mean `a·p0 + (a/2)·p1` of the overstatement assorters.
pub fn population_mean(rates: &RatePair, spec: &ContestSpec) -> f64 {
    let a = spec.noerror();
    a * rates.p0() + 0.5 * a * rates.p1()
}

/// Equally spaced grid over the overstatement-rate rectangle
/// `[0, v] × [0, v/2]` (inclusive endpoints), keeping only pairs strictly
/// inside the feasible region `a·p2 + (a/2)·p1 < a - 1/2`; boundary points
/// are removed. `(0, 0)` always survives, so the result is never empty.
///
/// Points are emitted in row-major order: the `p1` grid outermost, the
/// `p2` grid innermost.
pub fn feasible_rate_region(
    spec: &ContestSpec,
    grid_points_per_axis: usize,
) -> Result<Vec<RatePair>> {
    if grid_points_per_axis < 2 {
        return Err(AuditError::input(
            "grid_points_per_axis",
            format!("{grid_points_per_axis} is less than 2"),
        ));
    }
    let v = spec.diluted_margin();
    let steps = (grid_points_per_axis - 1) as f64;
    let mut region = Vec::new();
    for i in 0..grid_points_per_axis {
        let p1 = v * (i as f64 / steps);
        for j in 0..grid_points_per_axis {
            let p2 = 0.5 * v * (j as f64 / steps);
            let pair = RatePair { p1, p2 };
            if pair.is_feasible(spec) {
                region.push(pair);
            }
        }
    }
    Ok(region)
}
