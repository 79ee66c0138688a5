//! WebAssembly bindings for the classicality toolkit.
//!
//! Every export takes and returns JSON strings so the page needs no custom
//! binding glue: a call either yields `{"ok": ...}` or `{"error": "..."}`.
//! The functions are thin wrappers over the core crate and compile unchanged
//! on native targets, where the same suite of unit tests runs.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use spinclass::bounds::{bound_record, r_hat_max};
use spinclass::ensemble::{distance_to_mixed, interpolate, RandomStream};
use spinclass::lp::{generate_dictionary, extract_decomposition, refine_columns_with, LpStatus};
use spinclass::ipm::InteriorPoint;
use spinclass::tensor::{p_coeffs, p_eval, rho_to_coeffs};
use spinclass::{
    coherent_state, dicke_state, maximally_mixed, projector, DensityMatrix, Direction, SpinJ,
};

fn ok<T: Serialize>(value: &T) -> String {
    #[derive(Serialize)]
    struct Ok<'a, T> {
        ok: &'a T,
    }
    serde_json::to_string(&Ok { ok: value }).expect("serializable")
}

fn err(message: impl std::fmt::Display) -> String {
    #[derive(Serialize)]
    struct Err {
        error: String,
    }
    serde_json::to_string(&Err {
        error: message.to_string(),
    })
    .expect("serializable")
}

#[derive(Serialize)]
struct BoundRow {
    twice_j: u32,
    r_hat_max: f64,
    p_tilde_max: f64,
    gurvits: f64,
}

/// Closed-form bound table for `2j = 1 ..= twice_j_max`.
#[wasm_bindgen]
pub fn bound_table_json(twice_j_max: u32) -> String {
    let mut rows = Vec::new();
    for tj in 1..=twice_j_max {
        let j = match SpinJ::from_twice(tj) {
            Ok(j) => j,
            Err(e) => return err(e),
        };
        let rec = bound_record(j);
        rows.push(BoundRow {
            twice_j: tj,
            r_hat_max: rec.r_hat_max,
            p_tilde_max: rec.p_tilde_max,
            gurvits: rec.gurvits_radius,
        });
    }
    ok(&rows)
}

/// Builds a demo state as shared density-matrix JSON.
///
/// * `kind = "dicke"`: the `|j, m>` projector, `twice_m` doubled as usual;
/// * `kind = "coherent"`: the coherent projector along `(theta, phi)`;
/// * any state is then pulled toward the maximally mixed state:
///   `mix = 1` keeps the pure state, `mix = 0` is fully mixed.
#[wasm_bindgen]
pub fn demo_state_json(
    kind: &str,
    twice_j: u32,
    twice_m: i32,
    theta: f64,
    phi: f64,
    mix: f64,
) -> String {
    let j = match SpinJ::from_twice(twice_j) {
        Ok(j) => j,
        Err(e) => return err(e),
    };
    let pure = match kind {
        "dicke" => match dicke_state(j, twice_m) {
            Ok(s) => s,
            Err(e) => return err(e),
        },
        "coherent" => coherent_state(j, Direction::new(theta, phi)),
        other => return err(format!("unknown state kind {other:?}")),
    };
    let rho = match projector(&pure).and_then(|p| interpolate(&p, mix)) {
        Ok(r) => r,
        Err(e) => return err(e),
    };
    ok(&serde_json::from_str::<serde_json::Value>(&rho.to_json()).expect("valid json"))
}

#[derive(Serialize)]
struct Heatmap {
    twice_j: u32,
    n_theta: usize,
    n_phi: usize,
    /// Row-major `n_theta x n_phi` truncated-P values; row `i` is the
    /// colatitude `theta = pi (i + 1/2) / n_theta`.
    values: Vec<f64>,
    min: f64,
    max: f64,
    p_tilde_max: f64,
}

/// Truncated P-function of a state on a regular latitude/longitude grid.
#[wasm_bindgen]
pub fn p_heatmap_json(state_json: &str, n_theta: usize, n_phi: usize) -> String {
    if n_theta == 0 || n_phi == 0 || n_theta * n_phi > 1_000_000 {
        return err("grid must be nonempty and at most 10^6 points");
    }
    let rho = match DensityMatrix::from_json(state_json) {
        Ok(r) => r,
        Err(e) => return err(e),
    };
    let p = p_coeffs(&rho_to_coeffs(&rho));
    let mut values = Vec::with_capacity(n_theta * n_phi);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n_theta {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_theta as f64;
        for k in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
            let v = match p_eval(&p, Direction::new(theta, phi)) {
                Ok(v) => v,
                Err(e) => return err(e),
            };
            min = min.min(v);
            max = max.max(v);
            values.push(v);
        }
    }
    ok(&Heatmap {
        twice_j: rho.j().twice(),
        n_theta,
        n_phi,
        values,
        min,
        max,
        p_tilde_max: bound_record(rho.j()).p_tilde_max,
    })
}

#[derive(Serialize)]
struct ClassifyOutput {
    twice_j: u32,
    status: LpStatus,
    k_max: f64,
    r: f64,
    r_l: f64,
    r_hat_max: f64,
    duality_gap: f64,
    residual: f64,
    atoms: Vec<Atom>,
}

#[derive(Serialize)]
struct Atom {
    weight: f64,
    theta: f64,
    phi: f64,
}

/// Classicality LP for one state over a seeded random dictionary.
#[wasm_bindgen]
pub fn classify_json(state_json: &str, dict_size: usize, seed: u64, refine: usize) -> String {
    let rho = match DensityMatrix::from_json(state_json) {
        Ok(r) => r,
        Err(e) => return err(e),
    };
    let j = rho.j();
    if dict_size > 50_000 {
        return err("dictionary larger than 50000 is too slow for the browser demo");
    }
    let dict = match generate_dictionary(j, dict_size, &RandomStream::new(seed, u64::MAX)) {
        Ok(d) => d,
        Err(e) => return err(e),
    };
    let solver = InteriorPoint::default();
    let (res, used) = match refine_columns_with(&rho, &dict, refine, &solver) {
        Ok(x) => x,
        Err(e) => return err(e),
    };
    let r = distance_to_mixed(&rho);
    let r_l = if res.status == LpStatus::CappedAtOne {
        r
    } else {
        res.k_max * r
    };
    let atoms = extract_decomposition(&res, &used)
        .into_iter()
        .map(|(weight, dir)| Atom {
            weight,
            theta: dir.theta(),
            phi: dir.phi(),
        })
        .collect();
    ok(&ClassifyOutput {
        twice_j: j.twice(),
        status: res.status,
        k_max: res.k_max,
        r,
        r_l,
        r_hat_max: r_hat_max(j),
        duality_gap: res.duality_gap,
        residual: res.residual,
        atoms,
    })
}
