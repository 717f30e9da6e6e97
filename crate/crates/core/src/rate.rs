//! Rate values tagged with the method that produced them.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NumericGap,
    KramersFull,
    KramersBarrier,
    SmallDetuning,
    NearCritical,
    LangevinMc,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::NumericGap,
        Method::KramersFull,
        Method::KramersBarrier,
        Method::SmallDetuning,
        Method::NearCritical,
        Method::LangevinMc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::NumericGap => "numeric-gap",
            Method::KramersFull => "kramers-full",
            Method::KramersBarrier => "kramers-barrier",
            Method::SmallDetuning => "small-detuning",
            Method::NearCritical => "near-critical",
            Method::LangevinMc => "langevin-mc",
        }
    }

    /// Short column suffix used in sweep tables (`gamma_<suffix>`).
    pub fn column(&self) -> &'static str {
        match self {
            Method::NumericGap => "numeric",
            Method::KramersFull => "full",
            Method::KramersBarrier => "barrier",
            Method::SmallDetuning => "small",
            Method::NearCritical => "critical",
            Method::LangevinMc => "langevin",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.column() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_diag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Rate in the same units as the model parameters; may underflow to 0.
    pub value: f64,
    /// Natural log of the rate; `-inf` for an exactly vanishing rate.
    pub log_value: f64,
    pub method: Method,
    /// False when the asymptotic preconditions of the method are violated.
    pub in_domain: bool,
    pub meta: RateMeta,
}

impl RateEstimate {
    pub fn from_log(log_value: f64, method: Method, in_domain: bool) -> Self {
        RateEstimate {
            value: log_value.exp(),
            log_value,
            method,
            in_domain,
            meta: RateMeta::default(),
        }
    }

    pub fn from_value(value: f64, method: Method, in_domain: bool) -> Self {
        RateEstimate {
            value,
            log_value: value.ln(),
            method,
            in_domain,
            meta: RateMeta::default(),
        }
    }

    pub fn log10(&self) -> f64 {
        self.log_value / std::f64::consts::LN_10
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_parse_back() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.as_str()), Some(m));
            assert_eq!(Method::parse(m.column()), Some(m));
        }
        assert_eq!(Method::parse("bogus"), None);
    }

    #[test]
    fn log_space_keeps_underflowed_rates() {
        let r = RateEstimate::from_log(-800.0, Method::KramersBarrier, true);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.log_value, -800.0);
        let z = RateEstimate::from_value(0.0, Method::NumericGap, true);
        assert_eq!(z.log_value, f64::NEG_INFINITY);
    }
}
