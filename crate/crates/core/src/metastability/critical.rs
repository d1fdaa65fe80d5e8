//! Critical size `s*`, resettling size `s̃` and the closed-form critical sizes
//! of the square and doubled square lattices.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponent::{fmt_rational, Alpha, Rational};
use crate::isoperimetry::{
    doubled_torus_delta, torus_delta, ClosedFormFamily, IsoperimetricProfile, Provenance,
};

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(*r))
}

/// `g(s) = Δ(s) - α(s - 1)`.
pub fn g_value(delta: i64, s: usize, alpha: Alpha) -> Rational {
    Rational::from_integer(delta) - alpha.value() * Rational::from_integer(s as i64 - 1)
}

/// Critical and resettling sizes derived from an isoperimetric profile.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalAnalysis {
    pub alpha: Alpha,
    pub s_star: usize,
    #[serde(serialize_with = "ser_rational")]
    pub g_star: Rational,
    pub delta_star: i64,
    pub s_tilde: usize,
    pub ell_star: Option<usize>,
    /// `s*` is the only maximiser of `g` on `{0, ..., s̃}`.
    pub unique_max: bool,
    /// All maximisers of `g` on `{0, ..., s̃}`.
    pub maximizers: Vec<usize>,
    /// `|U| - s* - Δ(s*)`, when `|U|` is known.
    pub t_star: Option<i64>,
    /// `Δ(0), ..., Δ(s_max)` of the profile used.
    #[serde(skip)]
    pub values: Vec<i64>,
}

impl CriticalAnalysis {
    pub fn delta(&self, s: usize) -> Option<i64> {
        self.values.get(s).copied()
    }

    pub fn g(&self, s: usize) -> Option<Rational> {
        self.delta(s).map(|d| g_value(d, s, self.alpha))
    }

    /// `⌈1/α⌉ - 1`.
    pub fn default_kappa(&self) -> usize {
        self.alpha.default_kappa()
    }
}

/// Locate `s*` and `s̃` in `Δ(0), ..., Δ(s_max)`.
///
/// Fails when no `s > s*` with `Δ(s) ≤ αs` exists within the given values.
pub fn critical_analysis(values: &[i64], alpha: Alpha, n_u: Option<usize>) -> Result<CriticalAnalysis> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(
            "profile must cover at least sizes 0 and 1".into(),
        ));
    }
    let a = alpha.value();
    let mut best = g_value(values[1], 1, alpha);
    let mut arg = 1;
    let mut s_tilde = None;
    for (t, &d) in values.iter().enumerate().skip(1) {
        let gt = g_value(d, t, alpha);
        if gt > best {
            best = gt;
            arg = t;
        }
        if t > arg && Rational::from_integer(d) <= a * Rational::from_integer(t as i64) {
            s_tilde = Some(t);
            break;
        }
    }
    let Some(s_tilde) = s_tilde else {
        return Err(Error::Precondition(format!(
            "no size s with Δ(s) ≤ αs above the critical size within the profile bound {} \
             (is |U| < (1+α)|V| violated?)",
            values.len() - 1
        )));
    };
    let maximizers: Vec<usize> = (0..=s_tilde)
        .filter(|&s| g_value(values[s], s, alpha) == best)
        .collect();
    Ok(CriticalAnalysis {
        alpha,
        s_star: arg,
        g_star: best,
        delta_star: values[arg],
        s_tilde,
        ell_star: None,
        unique_max: maximizers.len() == 1,
        maximizers,
        t_star: n_u.map(|nu| nu as i64 - arg as i64 - values[arg]),
        values: values.to_vec(),
    })
}

/// Critical analysis of a profile, filling in `ℓ*` for lattice-like families.
pub fn analyze_profile(
    profile: &IsoperimetricProfile,
    alpha: Alpha,
    n_u: Option<usize>,
    family: Option<ClosedFormFamily>,
) -> Result<CriticalAnalysis> {
    let mut out = critical_analysis(&profile.values(), alpha, n_u)?;
    out.ell_star = match family {
        Some(ClosedFormFamily::Torus { .. }) => Some(torus_critical_size(alpha).ell_star),
        Some(ClosedFormFamily::DoubledTorus { .. }) => {
            Some(doubled_torus_critical_size(alpha).ell_star)
        }
        _ => None,
    };
    Ok(out)
}

/// Default search bound for `s̃` on the square lattice, `⌈8/α²⌉ + 1`.
pub fn lattice_search_bound(alpha: Alpha) -> usize {
    let r = alpha.recip();
    (Rational::from_integer(8) * r * r).ceil().to_integer() as usize + 1
}

/// Default search bound for `s̃` on the doubled lattice, `⌈(2/α + 1)² + (2/α)²⌉`.
pub fn doubled_lattice_search_bound(alpha: Alpha) -> usize {
    let t = Rational::from_integer(2) * alpha.recip();
    let one = Rational::from_integer(1);
    ((t + one) * (t + one) + t * t).ceil().to_integer() as usize
}

/// `Δ` of the infinite square lattice up to `s_max`.
pub fn square_lattice_profile(s_max: usize) -> IsoperimetricProfile {
    let values: Vec<i64> = (0..=s_max).map(torus_delta).collect();
    IsoperimetricProfile::from_values(&values, Provenance::ClosedForm("square-lattice"))
}

/// `Δ` of the infinite doubled square lattice up to `s_max`.
pub fn doubled_lattice_profile(s_max: usize) -> IsoperimetricProfile {
    let values: Vec<i64> = (0..=s_max).map(doubled_torus_delta).collect();
    IsoperimetricProfile::from_values(&values, Provenance::ClosedForm("doubled-square-lattice"))
}

/// Closed-form critical size of a lattice family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaPrediction {
    pub family: &'static str,
    pub ell_star: usize,
    /// `1` or `2` for the doubled lattice, by the sign of `ℓ* - 1/α`.
    pub case: Option<u8>,
    pub s_star: usize,
    /// The genericity condition (`2/α ∉ ℤ`, resp. `4/α ∉ ℤ`) holds.
    pub generic: bool,
    /// All sizes that can tie for the maximum when genericity fails; `[s_star]` otherwise.
    pub candidates: Vec<usize>,
}

impl LemmaPrediction {
    pub fn tie_reported(&self) -> bool {
        self.candidates.len() > 1
    }
}

fn is_integer(r: Rational) -> bool {
    r.is_integer()
}

/// `s* = ℓ*(ℓ*-1) + 1` with `ℓ* = ⌈1/α⌉`.
pub fn torus_critical_size(alpha: Alpha) -> LemmaPrediction {
    let r = alpha.recip();
    let l = r.ceil().to_integer() as usize;
    let s = l * (l - 1) + 1;
    let generic = !is_integer(Rational::from_integer(2) * r);
    let candidates = if is_integer(r) {
        vec![s, l * l + 1, l * (l + 1) + 1]
    } else {
        vec![s]
    };
    LemmaPrediction {
        family: "torus",
        ell_star: l,
        case: None,
        s_star: s,
        generic,
        candidates,
    }
}

fn doubled_sizes(l: usize) -> (usize, usize, usize) {
    let base = l * l + (l - 1) * (l - 1);
    (base + l, base + 2 * l, base + 3 * l)
}

/// `s* = ℓ*² + (ℓ*-1)² + ℓ*` if `ℓ* > 1/α` and `ℓ*² + (ℓ*-1)² + 3ℓ*` if
/// `ℓ* < 1/α`, with `ℓ*` the integer closest to `1/α`.
pub fn doubled_torus_critical_size(alpha: Alpha) -> LemmaPrediction {
    let r = alpha.recip();
    let generic = !is_integer(Rational::from_integer(4) * r);
    let fl = r.floor().to_integer() as usize;
    let frac = r - r.floor();
    let half = Rational::new(1, 2);
    if is_integer(r) {
        let (a, b, c) = doubled_sizes(fl);
        return LemmaPrediction {
            family: "doubled-torus",
            ell_star: fl,
            case: None,
            s_star: a,
            generic,
            candidates: vec![a, b, c],
        };
    }
    if frac == half {
        // 1/α is equidistant from ⌊1/α⌋ (case 2) and ⌈1/α⌉ (case 1)
        let low = doubled_sizes(fl).2;
        let high = doubled_sizes(fl + 1).0;
        return LemmaPrediction {
            family: "doubled-torus",
            ell_star: fl,
            case: Some(2),
            s_star: low,
            generic,
            candidates: vec![low, high],
        };
    }
    let (l, case) = if frac < half { (fl, 2u8) } else { (fl + 1, 1u8) };
    let (a, _, c) = doubled_sizes(l);
    let s = if case == 1 { a } else { c };
    LemmaPrediction {
        family: "doubled-torus",
        ell_star: l,
        case: Some(case),
        s_star: s,
        generic,
        candidates: vec![s],
    }
}

/// Whether the argmax route agrees with a closed-form prediction: a unique
/// maximiser equal to `s_star` in the generic case, and the same tied set of
/// maximisers otherwise.
pub fn lemma_agrees(pred: &LemmaPrediction, analysis: &CriticalAnalysis) -> bool {
    if pred.tie_reported() {
        analysis.maximizers == pred.candidates
    } else {
        analysis.unique_max && analysis.s_star == pred.s_star
    }
}

/// Argmax analysis of the infinite square lattice with the default search bound.
pub fn square_lattice_analysis(alpha: Alpha) -> Result<CriticalAnalysis> {
    let p = square_lattice_profile(lattice_search_bound(alpha));
    let mut a = critical_analysis(&p.values(), alpha, None)?;
    a.ell_star = Some(torus_critical_size(alpha).ell_star);
    Ok(a)
}

/// Argmax analysis of the infinite doubled square lattice with the default search bound.
pub fn doubled_lattice_analysis(alpha: Alpha) -> Result<CriticalAnalysis> {
    let p = doubled_lattice_profile(doubled_lattice_search_bound(alpha));
    let mut a = critical_analysis(&p.values(), alpha, None)?;
    a.ell_star = Some(doubled_torus_critical_size(alpha).ell_star);
    Ok(a)
}
