use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical physical coefficient names.
///
/// The combined equation's `beta` is the same diffusion coefficient as the
/// advection-diffusion `D`, and parses to [`Coeff::D`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Coeff {
    C,
    D,
    Alpha,
    Gamma,
    DA,
    DB,
    Delta,
    F,
    K,
    Nu,
}

impl Coeff {
    pub const ALL: [Coeff; 10] = [
        Coeff::C,
        Coeff::D,
        Coeff::Alpha,
        Coeff::Gamma,
        Coeff::DA,
        Coeff::DB,
        Coeff::Delta,
        Coeff::F,
        Coeff::K,
        Coeff::Nu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Coeff::C => "c",
            Coeff::D => "D",
            Coeff::Alpha => "alpha",
            Coeff::Gamma => "gamma",
            Coeff::DA => "D_A",
            Coeff::DB => "D_B",
            Coeff::Delta => "delta",
            Coeff::F => "F",
            Coeff::K => "k",
            Coeff::Nu => "nu",
        }
    }

    /// Diffusivities and viscosities must be nonnegative.
    pub fn nonnegative(self) -> bool {
        matches!(self, Coeff::D | Coeff::DA | Coeff::DB | Coeff::Nu)
    }

    /// Reaction strength is fixed per operator kind and never summed.
    pub fn identifiable(self) -> bool {
        self != Coeff::Delta
    }
}

impl FromStr for Coeff {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "c" | "v" => Coeff::C,
            "D" | "beta" => Coeff::D,
            "alpha" => Coeff::Alpha,
            "gamma" => Coeff::Gamma,
            "D_A" => Coeff::DA,
            "D_B" => Coeff::DB,
            "delta" => Coeff::Delta,
            "F" => Coeff::F,
            "k" => Coeff::K,
            "nu" => Coeff::Nu,
            other => return Err(Error::Config(format!("unknown coefficient `{other}`"))),
        })
    }
}

impl TryFrom<String> for Coeff {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Coeff> for String {
    fn from(c: Coeff) -> String {
        c.name().to_string()
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type Coefficients = BTreeMap<Coeff, f64>;

/// Render coefficients as `name=value` pairs joined by `;`.
pub fn format_coefficients(mu: &Coefficients) -> String {
    mu.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Parse `c=0.5,D=0.3` (comma or semicolon separated).
pub fn parse_coefficients(s: &str) -> Result<Coefficients> {
    let mut out = Coefficients::new();
    for part in s.split([',', ';']).map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected name=value, got `{part}`")))?;
        let coeff: Coeff = k.trim().parse()?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad number in `{part}`")))?;
        out.insert(coeff, value);
    }
    Ok(out)
}

/// The single-physics operator kinds a dictionary can hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhysicsKind {
    #[serde(rename = "advection")]
    Advection1D,
    #[serde(rename = "diffusion")]
    Diffusion1D,
    #[serde(rename = "nonlinear_advection")]
    NonlinAdvection1D,
    #[serde(rename = "dispersion")]
    Dispersion1D,
    #[serde(rename = "reaction")]
    ReactionGS,
    #[serde(rename = "diffusion_kill")]
    DiffusionKillGS,
    #[serde(rename = "euler")]
    Euler2D,
    #[serde(rename = "diffusion2d")]
    Diffusion2D,
}

impl PhysicsKind {
    pub fn required(self) -> &'static [Coeff] {
        match self {
            PhysicsKind::Advection1D => &[Coeff::C],
            PhysicsKind::Diffusion1D => &[Coeff::D],
            PhysicsKind::NonlinAdvection1D => &[Coeff::Alpha],
            PhysicsKind::Dispersion1D => &[Coeff::Gamma],
            PhysicsKind::ReactionGS => &[Coeff::Delta, Coeff::F],
            PhysicsKind::DiffusionKillGS => &[Coeff::DA, Coeff::DB, Coeff::K],
            PhysicsKind::Euler2D => &[],
            PhysicsKind::Diffusion2D => &[Coeff::Nu],
        }
    }

    pub fn dims(self) -> usize {
        match self {
            PhysicsKind::Advection1D
            | PhysicsKind::Diffusion1D
            | PhysicsKind::NonlinAdvection1D
            | PhysicsKind::Dispersion1D => 1,
            _ => 2,
        }
    }

    pub fn channels(self) -> usize {
        match self {
            PhysicsKind::ReactionGS | PhysicsKind::DiffusionKillGS => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhysicsKind::Advection1D => "advection",
            PhysicsKind::Diffusion1D => "diffusion",
            PhysicsKind::NonlinAdvection1D => "nonlinear_advection",
            PhysicsKind::Dispersion1D => "dispersion",
            PhysicsKind::ReactionGS => "reaction",
            PhysicsKind::DiffusionKillGS => "diffusion_kill",
            PhysicsKind::Euler2D => "euler",
            PhysicsKind::Diffusion2D => "diffusion2d",
        }
    }
}

impl fmt::Display for PhysicsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One operator kind together with exactly the coefficients it uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub kind: PhysicsKind,
    pub coeffs: Coefficients,
}

impl PhysicsParams {
    pub fn new(kind: PhysicsKind, coeffs: Coefficients) -> Result<Self> {
        let required = kind.required();
        for c in required {
            if !coeffs.contains_key(c) {
                return Err(Error::invalid(format!("{kind} needs coefficient {c}")));
            }
        }
        for (c, v) in &coeffs {
            if !required.contains(c) {
                return Err(Error::invalid(format!("{kind} does not use coefficient {c}")));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("{c} = {v} is not finite")));
            }
            if c.nonnegative() && *v < 0.0 {
                return Err(Error::invalid(format!("{c} = {v} must be nonnegative")));
            }
        }
        Ok(PhysicsParams { kind, coeffs })
    }

    pub fn advection(c: f64) -> Result<Self> {
        Self::new(PhysicsKind::Advection1D, [(Coeff::C, c)].into())
    }

    pub fn diffusion(d: f64) -> Result<Self> {
        Self::new(PhysicsKind::Diffusion1D, [(Coeff::D, d)].into())
    }

    pub fn nonlinear_advection(alpha: f64) -> Result<Self> {
        Self::new(PhysicsKind::NonlinAdvection1D, [(Coeff::Alpha, alpha)].into())
    }

    pub fn dispersion(gamma: f64) -> Result<Self> {
        Self::new(PhysicsKind::Dispersion1D, [(Coeff::Gamma, gamma)].into())
    }

    /// Pure reaction with unit reaction strength.
    pub fn reaction(feed: f64) -> Result<Self> {
        Self::new(PhysicsKind::ReactionGS, [(Coeff::Delta, 1.0), (Coeff::F, feed)].into())
    }

    pub fn diffusion_kill(d_a: f64, d_b: f64, kill: f64) -> Result<Self> {
        Self::new(
            PhysicsKind::DiffusionKillGS,
            [(Coeff::DA, d_a), (Coeff::DB, d_b), (Coeff::K, kill)].into(),
        )
    }

    pub fn euler() -> Self {
        PhysicsParams {
            kind: PhysicsKind::Euler2D,
            coeffs: Coefficients::new(),
        }
    }

    pub fn diffusion2d(nu: f64) -> Result<Self> {
        Self::new(PhysicsKind::Diffusion2D, [(Coeff::Nu, nu)].into())
    }

    /// Coefficient value; absent coefficients are zero.
    pub fn get(&self, c: Coeff) -> f64 {
        self.coeffs.get(&c).copied().unwrap_or(0.0)
    }
}

/// Numerical knobs shared by every solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Bound on `max|2 alpha u| h / dx` for the nonlinear advection substeps.
    pub advective_cfl: f64,
    /// Bound on `(max|u| + max|v|) h / dx` for vorticity substeps.
    pub euler_cfl: f64,
    /// Bound on `rate * h` for Gray-Scott reaction substeps.
    pub reaction_limit: f64,
    /// Bound on `nu * max|k|^2 * h` inside the implicit midpoint solve.
    pub diffusion_limit: f64,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
    /// Lower bound on internal substeps per flow call.
    pub min_substeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            advective_cfl: 0.4,
            euler_cfl: 0.5,
            reaction_limit: 0.1,
            diffusion_limit: 2.0,
            fixed_point_tol: 1e-10,
            fixed_point_max_iter: 50,
            min_substeps: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("advective_cfl", self.advective_cfl),
            ("euler_cfl", self.euler_cfl),
            ("reaction_limit", self.reaction_limit),
            ("diffusion_limit", self.diffusion_limit),
            ("fixed_point_tol", self.fixed_point_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.fixed_point_max_iter == 0 || self.min_substeps == 0 {
            return Err(Error::Config("iteration and substep counts must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn substeps(&self, demand: f64) -> usize {
        let n = if demand.is_finite() { demand.ceil().max(1.0) as usize } else { usize::MAX };
        n.max(self.min_substeps)
    }
}
