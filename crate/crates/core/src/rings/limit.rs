//! Closed forms for the inductive limits `lim→ (ℤ, ×p_n)`.

use num_bigint::BigInt;

use super::{Rat, RingError};

/// Bonding multipliers of an inductive system `ℤ → ℤ → ⋯`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Multipliers {
    /// Every bonding map is multiplication by the same integer.
    Constant(i64),
    /// `values[n - 1]` is the multiplier `p_n` of the map from level `n` to
    /// `n + 1`. `p_0 = 1` is implicit.
    PerStep(Vec<i64>),
}

/// A finite sum `Σ ρ^k(m_k)` of elements placed at levels `k ≥ 1`, with an
/// optional normalization shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitTermSeq {
    pub terms: Vec<(u32, i64)>,
    pub multipliers: Multipliers,
    pub shift: i32,
}

impl LimitTermSeq {
    pub fn new(terms: Vec<(u32, i64)>, multipliers: Multipliers) -> Self {
        LimitTermSeq {
            terms,
            multipliers,
            shift: 0,
        }
    }

    pub fn with_shift(mut self, w: i32) -> Self {
        self.shift = w;
        self
    }

    fn check_levels(&self) -> Result<(), RingError> {
        match self.terms.iter().find(|(k, _)| *k == 0) {
            Some(_) => Err(RingError::BadLevel(0)),
            None => Ok(()),
        }
    }
}

/// `Σ_k m_k / p^{k-1+w}` for a constant multiplier `p`.
pub fn phi_w(s: &LimitTermSeq) -> Result<Rat, RingError> {
    let p = match s.multipliers {
        Multipliers::Constant(p) => p,
        Multipliers::PerStep(_) => return Err(RingError::NotConstant),
    };
    if p == 0 {
        return Err(RingError::ZeroMultiplier { step: 1 });
    }
    s.check_levels()?;
    let base = Rat::from_int(p);
    let mut total = Rat::zero();
    for &(k, m) in &s.terms {
        let e = k as i32 - 1 + s.shift;
        total = total + Rat::from_int(m).checked_div(&base.pow(e)?)?;
    }
    Ok(total)
}

/// `Σ_n r_n / (p_0 p_1 ⋯ p_{n-1})` with `p_0 = 1`.
pub fn psi_limit(s: &LimitTermSeq) -> Result<Rat, RingError> {
    s.check_levels()?;
    let top = s.terms.iter().map(|&(k, _)| k).max().unwrap_or(1);
    let mult = |n: u32| -> Result<i64, RingError> {
        let p = match &s.multipliers {
            Multipliers::Constant(p) => *p,
            Multipliers::PerStep(v) => *v
                .get(n as usize - 1)
                .ok_or(RingError::MissingMultiplier { step: n })?,
        };
        if p == 0 {
            Err(RingError::ZeroMultiplier { step: n })
        } else {
            Ok(p)
        }
    };
    // prefix[n] = p_0 ⋯ p_{n-1}
    let mut prefix: Vec<BigInt> = vec![BigInt::from(1), BigInt::from(1)];
    for n in 1..top {
        let next = &prefix[n as usize] * BigInt::from(mult(n)?);
        prefix.push(next);
    }
    let mut total = Rat::zero();
    for &(k, r) in &s.terms {
        total = total + Rat::from_big(BigInt::from(r), prefix[k as usize].clone())?;
    }
    Ok(total)
}
