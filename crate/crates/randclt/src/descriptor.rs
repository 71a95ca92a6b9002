//! JSON descriptors for systems: `{kind, n, params, flags}`.

use randclt_core::systems::{Psi, PsiShape, System, SystemKind};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Kind-specific parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Walsh order; n = 2^d − 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    /// Profile name for shifted periodic systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    /// Explicit lacunary frequencies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<u64>>,
    /// Lacunary ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// First lacunary frequency when the sequence is generated from q.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagsDescriptor {
    pub isotropic: bool,
    pub fixed_norm: bool,
    pub mean_zero: bool,
    pub sup_norm_bound: f64,
    pub norm_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescriptor {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub params: Params,
    /// Optional on input; when present the boolean flags must match the
    /// system's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<FlagsDescriptor>,
}

/// Kinds accepted by [`SystemDescriptor::build`], with their parameters.
pub const KINDS: &[(&str, &str)] = &[
    ("trig", "n even"),
    ("cosine", "n"),
    ("chebyshev", "n"),
    ("shifted_periodic", "n, params.psi in {cosine, triangle, sawtooth, square}"),
    ("walsh", "params.d, or n = 2^d - 1"),
    ("empirical", "n"),
    ("lacunary_trig", "params.frequencies and params.q, or params.m1 and params.q with n = 2 * count"),
];

impl SystemDescriptor {
    pub fn new(kind: &str, n: Option<usize>) -> Self {
        Self { kind: kind.to_string(), n, params: Params::default(), flags: None }
    }

    /// Builds the system at the descriptor's own n.
    pub fn build(&self) -> Result<System> {
        self.build_inner(self.n)
    }

    /// Builds the system at dimension `n`, overriding the descriptor's n and
    /// any size-determining parameter.
    pub fn build_with_n(&self, n: usize) -> Result<System> {
        let mut d = self.clone();
        d.params.d = None;
        if d.kind == "lacunary_trig" && d.params.frequencies.is_some() {
            return config("an explicit frequency list fixes n; drop n_list or use params.m1");
        }
        d.build_inner(Some(n))
    }

    fn build_inner(&self, n: Option<usize>) -> Result<System> {
        let need_n = || match n {
            Some(n) => Ok(n),
            None => config(format!("system kind {} needs n", self.kind)),
        };
        let system = match self.kind.as_str() {
            "trig" => System::trig(need_n()?)?,
            "cosine" => System::cosine(need_n()?)?,
            "chebyshev" => System::chebyshev(need_n()?)?,
            "empirical" => System::empirical(need_n()?)?,
            "shifted_periodic" => {
                let name = self.params.psi.as_deref().unwrap_or("cosine");
                let Some(shape) = PsiShape::from_name(name) else {
                    return config(format!("unknown profile {name:?}; expected cosine, triangle, sawtooth or square"));
                };
                System::shifted_periodic(need_n()?, Psi::preset(shape))?
            }
            "walsh" => match (self.params.d, n) {
                (Some(d), None) => System::walsh(d)?,
                (Some(d), Some(n)) => {
                    let s = System::walsh(d)?;
                    if s.n() != n {
                        return config(format!("walsh d = {d} has n = {}, not {n}", s.n()));
                    }
                    s
                }
                (None, Some(n)) => System::walsh_n(n)?,
                (None, None) => return config("walsh needs params.d or n"),
            },
            "lacunary_trig" => {
                let q = self.params.q.unwrap_or(2.0);
                match (&self.params.frequencies, self.params.m1) {
                    (Some(f), _) => {
                        let s = System::lacunary(f.clone(), q)?;
                        if let Some(n) = n {
                            if n != s.n() {
                                return config(format!("{} frequencies give n = {}, not {n}", f.len(), s.n()));
                            }
                        }
                        s
                    }
                    (None, m1) => {
                        let n = need_n()?;
                        if n % 2 != 0 {
                            return config(format!("lacunary_trig needs an even n, got {n}"));
                        }
                        System::lacunary_geometric(m1.unwrap_or(1), q, n / 2)?
                    }
                }
            }
            other => return config(format!("unknown system kind {other:?}")),
        };
        if let Some(f) = self.flags {
            let own = system.flags();
            if (f.isotropic, f.fixed_norm, f.mean_zero) != (own.isotropic, own.fixed_norm, own.mean_zero) {
                return config(format!("declared flags {f:?} do not match the flags of {}", system.name()));
            }
        }
        Ok(system)
    }

    /// The descriptor of an existing system, flags included.
    pub fn from_system(system: &System) -> Self {
        let mut params = Params::default();
        match system.kind() {
            SystemKind::ShiftedPeriodic(psi) => params.psi = Some(psi.name().to_string()),
            SystemKind::Walsh { d } => params.d = Some(*d),
            SystemKind::LacunaryTrig { frequencies, q } => {
                params.frequencies = Some(frequencies.clone());
                params.q = Some(*q);
            }
            _ => {}
        }
        let f = system.flags();
        Self {
            kind: system.name().to_string(),
            n: Some(system.n()),
            params,
            flags: Some(FlagsDescriptor {
                isotropic: f.isotropic,
                fixed_norm: f.fixed_norm,
                mean_zero: f.mean_zero,
                sup_norm_bound: f.sup_norm_bound,
                norm_bound: f.norm_bound,
            }),
        }
    }
}
