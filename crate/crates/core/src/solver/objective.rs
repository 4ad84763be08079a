use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::{cap_use, MigrationContext, Placement};
use crate::risk::{coarse_risk, exact_risk};
use crate::scenario::{Scenario, VnfKind};

/// Weights of the CPU, risk and migration terms; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights<T> {
    pub cap: T,
    pub risk: T,
    pub mig: T,
}

impl<T: Real> ObjectiveWeights<T> {
    pub fn new(cap: T, risk: T, mig: T) -> Result<Self> {
        let w = Self { cap, risk, mig };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.cap, self.risk, self.mig];
        if parts.iter().any(|&x| !(x >= T::zero())) {
            return Err(Error::Config("objective weights must be >= 0".into()));
        }
        let sum = (self.cap + self.risk + self.mig).as_f64();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "objective weights sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    /// (0.3, 0.5, 0.2)
    pub fn proposed() -> Self {
        Self {
            cap: T::lit(0.3),
            risk: T::lit(0.5),
            mig: T::lit(0.2),
        }
    }

    /// (1, 0, 0)
    pub fn resource_min() -> Self {
        Self {
            cap: T::one(),
            risk: T::zero(),
            mig: T::zero(),
        }
    }

    /// (0.5, 0, 0.5)
    pub fn migration_aware() -> Self {
        Self {
            cap: T::lit(0.5),
            risk: T::zero(),
            mig: T::lit(0.5),
        }
    }
}

/// Which risk figure enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMode {
    #[default]
    Exact,
    CoarseLb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationBounds<T> {
    pub cap_bar: T,
    pub risk_bar: T,
    pub mig_bar: T,
}

/// `cap_bar = Σ Cap_s`, `risk_bar = Σ_{n<n'} Σ_f w·occ_n(f)|U_n|·occ_n'(f)|U_n'|`,
/// `mig_bar = Σ Dis` over all entries.
pub fn normalization_bounds<T: Real>(sc: &Scenario<T>) -> NormalizationBounds<T> {
    let cap_bar = sc.capacity_cpu.iter().copied().sum();
    let mut risk_bar = T::zero();
    let ns = sc.slices.len();
    for a in 0..ns {
        for b in (a + 1)..ns {
            for f in VnfKind::ALL {
                let ma = sc.slices[a].occurrences(f) * sc.slices[a].users.len();
                let mb = sc.slices[b].occurrences(f) * sc.slices[b].users.len();
                if ma > 0 && mb > 0 {
                    risk_bar += sc.weight(a, b, f) * T::from_count(ma * mb);
                }
            }
        }
    }
    let mig_bar = sc
        .entries()
        .iter()
        .map(|e| sc.migration_disruption(e.vnf))
        .sum();
    NormalizationBounds {
        cap_bar,
        risk_bar,
        mig_bar,
    }
}

/// Per-unit multipliers `ω/bar`, zero where the bound is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scales<T> {
    pub cap: T,
    pub risk: T,
    pub mig: T,
}

impl<T: Real> Scales<T> {
    pub fn new(w: &ObjectiveWeights<T>, nb: &NormalizationBounds<T>) -> Self {
        let s = |omega: T, bar: T| {
            if bar > T::zero() {
                omega / bar
            } else {
                T::zero()
            }
        };
        Self {
            cap: s(w.cap, nb.cap_bar),
            risk: s(w.risk, nb.risk_bar),
            mig: s(w.mig, nb.mig_bar),
        }
    }

    #[inline]
    pub fn combine(&self, cap: T, risk: T, mig: T) -> T {
        self.cap * cap + self.risk * risk + self.mig * mig
    }
}

/// Raw objective terms of one placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms<T> {
    pub cap_use: T,
    /// Exact risk or its coarse lower bound, per [`RiskMode`].
    pub risk: T,
    pub mig: T,
}

impl<T: Real> ObjectiveTerms<T> {
    pub fn combine(&self, w: &ObjectiveWeights<T>, nb: &NormalizationBounds<T>) -> T {
        Scales::new(w, nb).combine(self.cap_use, self.risk, self.mig)
    }
}

pub fn objective_terms<T: Real>(
    p: &Placement,
    ctx: &MigrationContext,
    sc: &Scenario<T>,
    mode: RiskMode,
) -> ObjectiveTerms<T> {
    let risk = match mode {
        RiskMode::Exact => exact_risk(p, sc),
        RiskMode::CoarseLb => coarse_risk(p, sc).0,
    };
    ObjectiveTerms {
        cap_use: cap_use(p, sc),
        risk,
        mig: ctx.migration_cost(p, sc),
    }
}

/// `ω_cap·CapUse/cap_bar + ω_risk·Risk/risk_bar + ω_mig·Mig/mig_bar`.
pub fn objective<T: Real>(
    p: &Placement,
    ctx: &MigrationContext,
    weights: &ObjectiveWeights<T>,
    norms: &NormalizationBounds<T>,
    sc: &Scenario<T>,
    mode: RiskMode,
) -> T {
    objective_terms(p, ctx, sc, mode).combine(weights, norms)
}
