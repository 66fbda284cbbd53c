//! Box-plus combination of LLRs: `2 atanh(prod tanh(l_i / 2))`.
//!
//! Two numerically distinct kernels are provided:
//!
//! - [`Kernel::Tanh`] evaluates the hyperbolic-tangent product in exponential
//!   form. With `u_i = exp(-|l_i|)`, `tanh(|l_i|/2) = (1-u_i)/(1+u_i)` and
//!   `(1+P)/(1-P) = E_even / E_odd`, where `E_even`/`E_odd` are the even/odd
//!   elementary symmetric sums of the `u_i`. Both sums accumulate positive
//!   terms only, so the result keeps full precision even when the product of
//!   tangents is within a few ulps of one.
//! - [`Kernel::Jacobian`] folds the inputs pairwise with the max-star form
//!   `max(a+b,0) - max(a,b) + ln(1+e^-|a+b|) - ln(1+e^-|a-b|)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Check-node kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Tanh,
    #[default]
    Jacobian,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Tanh => "tanh",
            Kernel::Jacobian => "jacobian",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Kernel::Tanh),
            "jacobian" => Ok(Kernel::Jacobian),
            other => Err(Error::Config(format!("unknown kernel {other:?}"))),
        }
    }
}

/// Box-plus of a nonempty list, saturated to `[-llr_max, llr_max]`.
pub fn f_boxplus(llrs: &[f64], kernel: Kernel, llr_max: f64) -> Result<f64> {
    if llrs.is_empty() {
        return Err(Error::Domain("box-plus of an empty list".into()));
    }
    if llrs.iter().any(|l| l.is_nan()) {
        return Err(Error::Domain("box-plus input is NaN".into()));
    }
    let raw = match kernel {
        Kernel::Tanh => {
            let (sign, even, odd) = llrs.iter().fold((1.0, 1.0, 0.0), |(s, e, o), &l| {
                let (e2, o2) = absorb(e, o, (-l.abs()).exp());
                (if l < 0.0 { -s } else { s }, e2, o2)
            });
            sign * (even / odd).ln()
        }
        Kernel::Jacobian => llrs[1..]
            .iter()
            .fold(llrs[0], |acc, &l| boxplus_pair(acc, l)),
    };
    Ok(raw.clamp(-llr_max, llr_max))
}

/// Adds one factor `u` to the running even/odd symmetric sums.
#[inline]
pub(crate) fn absorb(even: f64, odd: f64, u: f64) -> (f64, f64) {
    (even + u * odd, odd + u * even)
}

/// Pairwise box-plus in max-star form. `+inf` is the identity element.
#[inline]
pub fn boxplus_pair(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        return if a > 0.0 { b } else { -b };
    }
    if b.is_infinite() {
        return if b > 0.0 { a } else { -a };
    }
    let s = a + b;
    let d = a - b;
    s.max(0.0) - a.max(b) + (-s.abs()).exp().ln_1p() - (-d.abs()).exp().ln_1p()
}
