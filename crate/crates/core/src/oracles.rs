//! Closed-form optima of `F` on the two unit triangles.
//!
//! Both use edges `(0,1)`, `(0,2)`, `(1,2)` of unit length, `γ = 1`, and
//! the Fiedler weight `μ ℓ (|V|−1)/2 = μ`.
//!
//! * Toy 1 has sources `(1, −1, 0)`.
//! * Toy 2 has sources `(1, −1/3, −2/3)`.
//!
//! Both optima depend on `μ` only through `μ/ν`. They switch from a tree to
//! the full triangle at `μ/ν = 1/2`.

use serde::{Deserialize, Serialize};

use crate::error::{NetError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `μ/ν ≤ 1/2`
    BelowHalf,
    /// `μ/ν > 1/2`
    AboveHalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyOptimum {
    /// Conductivities on `(0,1)`, `(0,2)`, `(1,2)`.
    pub conductivities: [f64; 3],
    /// Flux on `(0,1)`.
    pub flux: f64,
    pub f_value: f64,
    pub e_value: f64,
    pub regime: Regime,
    /// False when the value comes from a numerical search.
    pub analytic: bool,
}

fn check(nu: f64, mu: f64) -> Result<Regime> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(NetError::InvalidParameter(format!("nu = {nu}")));
    }
    if !(mu >= 0.0 && mu < nu) {
        return Err(NetError::InvalidParameter(format!(
            "need 0 <= mu < nu for a minimizer, got mu = {mu}, nu = {nu}"
        )));
    }
    Ok(if mu / nu > 0.5 { Regime::AboveHalf } else { Regime::BelowHalf })
}

/// Sources `(1, −1, 0)`: `F = 2/(2C₀+C₁) + ν(C₀+2C₁) − μ min(2C₀+C₁, 3C₁)`.
pub fn toy1_optimum(nu: f64, mu: f64) -> Result<ToyOptimum> {
    let regime = check(nu, mu)?;
    Ok(match regime {
        Regime::BelowHalf => {
            let c0 = 1.0 / nu.sqrt();
            ToyOptimum {
                conductivities: [c0, 0.0, 0.0],
                flux: 1.0,
                f_value: 2.0 * nu.sqrt(),
                e_value: 2.0 * nu.sqrt(),
                regime,
                analytic: true,
            }
        }
        Regime::AboveHalf => {
            let c = (2.0 / (nu - mu)).sqrt() / 3.0;
            ToyOptimum {
                conductivities: [c; 3],
                flux: 2.0 / 3.0,
                f_value: 2.0 * (2.0 * (nu - mu)).sqrt(),
                e_value: 2.0 / (3.0 * c) + 3.0 * nu * c,
                regime,
                analytic: true,
            }
        }
    })
}

/// Sources `(1, −1/3, −2/3)`. Between `μ = 0` and `μ/ν = 1/2` there is no
/// closed form and the optimum is found by a grid search with `C₁₂ = 0`.
pub fn toy2_optimum(nu: f64, mu: f64) -> Result<ToyOptimum> {
    let regime = check(nu, mu)?;
    let s = nu.sqrt();
    if regime == Regime::AboveHalf {
        // Equal conductivities c carry fluxes 4/9, 5/9, 1/9 and λ₁ = 3c.
        let c = (14.0 / (nu - mu)).sqrt() / 9.0;
        return Ok(ToyOptimum {
            conductivities: [c; 3],
            flux: 4.0 / 9.0,
            f_value: 2.0 * (14.0 * (nu - mu) / 9.0).sqrt(),
            e_value: 14.0 / (27.0 * c) + 3.0 * nu * c,
            regime,
            analytic: true,
        });
    }
    if mu == 0.0 {
        return Ok(ToyOptimum {
            conductivities: [1.0 / (3.0 * s), 2.0 / (3.0 * s), 0.0],
            flux: 1.0 / 3.0,
            f_value: 2.0 * s,
            e_value: 2.0 * s,
            regime,
            analytic: true,
        });
    }
    let r = mu / nu;
    let (a, b) = grid_minimize(|a, b| path_objective(a, b, r));
    let (kin, met) = (1.0 / (9.0 * a) + 4.0 / (9.0 * b), a + b);
    Ok(ToyOptimum {
        conductivities: [a / s, b / s, 0.0],
        flux: 1.0 / 3.0,
        f_value: s * path_objective(a, b, r),
        e_value: s * (kin + met),
        regime,
        analytic: false,
    })
}

/// `F/√ν` on the path 1–0–2 in the scaled variables `A = C₀₁√ν`,
/// `B = C₀₂√ν`, with `r = μ/ν`.
fn path_objective(a: f64, b: f64, r: f64) -> f64 {
    let lambda1 = a + b - (a * a - a * b + b * b).sqrt();
    1.0 / (9.0 * a) + 4.0 / (9.0 * b) + a + b - r * lambda1
}

/// Grid step 1e−3 on `[1e−3, 2]²`, then two tenfold refinements around the
/// best point.
fn grid_minimize(f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let scan = |a0: f64, b0: f64, h: f64, steps: i64, best: &mut (f64, f64, f64)| {
        for i in 0..=steps {
            let a = a0 + i as f64 * h;
            if a <= 0.0 {
                continue;
            }
            for j in 0..=steps {
                let b = b0 + j as f64 * h;
                if b <= 0.0 {
                    continue;
                }
                let v = f(a, b);
                if v < best.0 {
                    *best = (v, a, b);
                }
            }
        }
    };
    let h = 1e-3;
    scan(h, h, h, 1999, &mut best);
    for h in [1e-4, 1e-5] {
        let (a, b) = (best.1, best.2);
        scan(a - 10.0 * h, b - 10.0 * h, h, 20, &mut best);
    }
    (best.1, best.2)
}
