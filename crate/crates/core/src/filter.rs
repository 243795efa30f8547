//! Filter selection: a filter kind plus its parameter tuple, serializable as
//! `kind:key=value,...` (for example `ad:iterations=20,delta=0.2,kappa=54,conduction=exp`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format;
use crate::image::Image;
use crate::spatial::{
    anisotropic_diffusion, bilateral, matched_filter, pwnlm, AdParams, BilateralParams,
    MatchedFilterParams,
};
use crate::spectral::{cdwt_denoise, fde_wiener, CdwtParams, FdeParams, ThresholdMode};

/// Declaration order is the canonical sweep order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Mf,
    Bf,
    Ad,
    Cdwt,
    Fde,
    Pwnlm,
    None,
}

impl FilterKind {
    pub const ALL: [FilterKind; 7] = [
        FilterKind::Mf,
        FilterKind::Bf,
        FilterKind::Ad,
        FilterKind::Cdwt,
        FilterKind::Fde,
        FilterKind::Pwnlm,
        FilterKind::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Mf => "mf",
            FilterKind::Bf => "bf",
            FilterKind::Ad => "ad",
            FilterKind::Cdwt => "cdwt",
            FilterKind::Fde => "fde",
            FilterKind::Pwnlm => "pwnlm",
            FilterKind::None => "none",
        }
    }

    /// Linear in the input (up to the choice of parameters).
    pub fn is_linear(self) -> bool {
        matches!(self, FilterKind::Mf | FilterKind::Fde | FilterKind::None)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown filter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterSpec {
    Mf(MatchedFilterParams),
    Bf(BilateralParams),
    Ad(AdParams),
    Cdwt(CdwtParams),
    Fde(FdeParams),
    Pwnlm,
    None,
}

impl FilterSpec {
    pub fn kind(&self) -> FilterKind {
        match self {
            FilterSpec::Mf(_) => FilterKind::Mf,
            FilterSpec::Bf(_) => FilterKind::Bf,
            FilterSpec::Ad(_) => FilterKind::Ad,
            FilterSpec::Cdwt(_) => FilterKind::Cdwt,
            FilterSpec::Fde(_) => FilterKind::Fde,
            FilterSpec::Pwnlm => FilterKind::Pwnlm,
            FilterSpec::None => FilterKind::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FilterSpec::Mf(p) => p.validate(),
            FilterSpec::Bf(p) => p.validate(),
            FilterSpec::Ad(p) => p.validate(),
            FilterSpec::Cdwt(p) => p.validate(),
            FilterSpec::Fde(p) => p.validate(),
            FilterSpec::Pwnlm | FilterSpec::None => Ok(()),
        }
    }

    /// Runs the filter. `None` returns the input unchanged.
    pub fn apply(&self, img: &Image) -> Result<Image> {
        self.validate()?;
        Ok(match self {
            FilterSpec::Mf(p) => matched_filter(img, p),
            FilterSpec::Bf(p) => bilateral(img, p),
            FilterSpec::Ad(p) => anisotropic_diffusion(img, p),
            FilterSpec::Cdwt(p) => cdwt_denoise(img, p),
            FilterSpec::Fde(p) => fde_wiener(img, p),
            FilterSpec::Pwnlm => pwnlm(img)?,
            FilterSpec::None => img.clone(),
        })
    }

    /// Parameter list without the kind prefix; empty for parameterless filters.
    pub fn params_string(&self) -> String {
        let f = format::param;
        match self {
            FilterSpec::Mf(p) => format!("half_width={},sigma_t={}", p.half_width, f(p.sigma_t)),
            FilterSpec::Bf(p) => format!(
                "half_width={},sigma_sx={},sigma_sy={},sigma_r={}",
                p.half_width,
                f(p.sigma_sx),
                f(p.sigma_sy),
                f(p.sigma_r)
            ),
            FilterSpec::Ad(p) => format!(
                "iterations={},delta={},kappa={},conduction={}",
                p.iterations,
                f(p.delta),
                f(p.kappa),
                p.conduction
            ),
            FilterSpec::Cdwt(p) => match p.mode {
                ThresholdMode::Hard => format!("threshold={}", f(p.threshold)),
                ThresholdMode::Soft => format!("threshold={},mode=soft", f(p.threshold)),
            },
            FilterSpec::Fde(p) => format!("noise_variance={}", f(p.noise_variance)),
            FilterSpec::Pwnlm | FilterSpec::None => String::new(),
        }
    }

    /// Builds a spec from a kind and a `key=value,...` list. Keys that are not
    /// given keep their defaults.
    pub fn from_parts(kind: FilterKind, params: &str) -> Result<Self> {
        let pairs = parse_pairs(params)?;
        let mut used = vec![false; pairs.len()];
        let mut take = |key: &str| -> Option<&str> {
            pairs.iter().zip(used.iter_mut()).find(|((k, _), _)| *k == key).map(|((_, v), u)| {
                *u = true;
                *v
            })
        };
        let spec = match kind {
            FilterKind::Mf => {
                let mut p = MatchedFilterParams::default();
                set(&mut p.half_width, take("half_width"), "half_width")?;
                set(&mut p.sigma_t, take("sigma_t"), "sigma_t")?;
                FilterSpec::Mf(p)
            }
            FilterKind::Bf => {
                let mut p = BilateralParams::default();
                set(&mut p.half_width, take("half_width"), "half_width")?;
                if let Some(s) = take("sigma_s") {
                    set(&mut p.sigma_sx, Some(s), "sigma_s")?;
                    p.sigma_sy = p.sigma_sx;
                }
                set(&mut p.sigma_sx, take("sigma_sx"), "sigma_sx")?;
                set(&mut p.sigma_sy, take("sigma_sy"), "sigma_sy")?;
                set(&mut p.sigma_r, take("sigma_r"), "sigma_r")?;
                FilterSpec::Bf(p)
            }
            FilterKind::Ad => {
                let mut p = AdParams::default();
                set(&mut p.iterations, take("iterations"), "iterations")?;
                set(&mut p.delta, take("delta"), "delta")?;
                set(&mut p.kappa, take("kappa"), "kappa")?;
                set(&mut p.conduction, take("conduction"), "conduction")?;
                FilterSpec::Ad(p)
            }
            FilterKind::Cdwt => {
                let mut p = CdwtParams::default();
                set(&mut p.threshold, take("threshold"), "threshold")?;
                set(&mut p.levels, take("levels"), "levels")?;
                set(&mut p.mode, take("mode"), "mode")?;
                FilterSpec::Cdwt(p)
            }
            FilterKind::Fde => {
                let mut p = FdeParams::default();
                set(&mut p.noise_variance, take("noise_variance"), "noise_variance")?;
                FilterSpec::Fde(p)
            }
            FilterKind::Pwnlm => FilterSpec::Pwnlm,
            FilterKind::None => FilterSpec::None,
        };
        if let Some(((k, _), _)) = pairs.iter().zip(&used).find(|(_, u)| !**u) {
            return Err(Error::InvalidParams(format!("{kind}: unknown parameter `{k}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_pairs(s: &str) -> Result<Vec<(&str, &str)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::InvalidParams(format!("expected key=value, got `{p}`")))
        })
        .collect()
}

fn set<T: FromStr>(slot: &mut T, value: Option<&str>, key: &str) -> Result<()> {
    if let Some(v) = value {
        *slot = v
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad value `{v}` for `{key}`")))?;
    }
    Ok(())
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params_string();
        if params.is_empty() {
            write!(f, "{}", self.kind())
        } else {
            write!(f, "{}:{}", self.kind(), params)
        }
    }
}

impl FromStr for FilterSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        FilterSpec::from_parts(kind.trim().parse()?, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::Conduction;

    #[test]
    fn table_one_ad_roundtrip() {
        let s = "ad:iterations=20,delta=0.2,kappa=54,conduction=exp";
        let spec: FilterSpec = s.parse().unwrap();
        assert_eq!(
            spec,
            FilterSpec::Ad(AdParams {
                iterations: 20,
                delta: 0.2,
                kappa: 54.0,
                conduction: Conduction::Exponential
            })
        );
        assert_eq!(spec.to_string(), s);
    }

    #[test]
    fn spectral_strings() {
        assert_eq!("cdwt:threshold=150".parse::<FilterSpec>().unwrap().to_string(), "cdwt:threshold=150");
        let fde: FilterSpec = "fde:noise_variance=1e-9".parse().unwrap();
        assert_eq!(fde, FilterSpec::Fde(FdeParams { noise_variance: 1e-9 }));
        assert_eq!(fde.to_string(), "fde:noise_variance=1e-9");
        let soft: FilterSpec = "cdwt:threshold=20,mode=soft".parse().unwrap();
        assert_eq!(soft.to_string(), "cdwt:threshold=20,mode=soft");
    }

    #[test]
    fn missing_keys_take_defaults() {
        let spec: FilterSpec = "ad:iterations=0".parse().unwrap();
        assert_eq!(
            spec,
            FilterSpec::Ad(AdParams {
                iterations: 0,
                ..AdParams::default()
            })
        );
        assert_eq!("pwnlm".parse::<FilterSpec>().unwrap(), FilterSpec::Pwnlm);
        assert_eq!("none".parse::<FilterSpec>().unwrap().to_string(), "none");
        let bf: FilterSpec = "bf:sigma_s=2".parse().unwrap();
        match bf {
            FilterSpec::Bf(p) => assert_eq!((p.sigma_sx, p.sigma_sy), (2.0, 2.0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "xx",
            "ad:iterations=-1",
            "ad:delta=0.3",
            "ad:kappa",
            "ad:foo=1",
            "mf:sigma_t=0",
            "cdwt:levels=4",
            "fde:noise_variance=abc",
            "pwnlm:h=3",
        ] {
            assert!(bad.parse::<FilterSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn kind_order_is_declaration_order() {
        let mut kinds = FilterKind::ALL.to_vec();
        kinds.reverse();
        kinds.sort();
        assert_eq!(kinds, FilterKind::ALL);
    }
}
