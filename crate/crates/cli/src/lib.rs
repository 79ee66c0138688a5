//! Drivers behind the `spinclass` binary: bound tables, single-state
//! classicality reports, and the Monte-Carlo radius estimate, together with
//! their CSV/JSON serialization. Everything here is deterministic given the
//! seed; per-sample work is parallelized by stream index and reduced in
//! stream order so worker count never changes the output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use spinclass::bounds::{bound_record, r_hat_max, BoundRecord};
use spinclass::ensemble::{
    distance_to_mixed, hs_random_state, RandomStream, GENERATOR_VERSION,
};
use spinclass::ipm::{InteriorPoint, SOLVER_VERSION};
use spinclass::lp::{
    build_lp, extract_decomposition, generate_dictionary, refine_columns_with, Dictionary,
    KmaxResult, LpStatus,
};
use spinclass::{maximally_mixed, DensityMatrix, Error, Result, SpinJ};

/// Outcome of one Hilbert-Schmidt sample: distance from the mixed state, the
/// LP optimum, and the classical reach `r_l` of its direction. For capped
/// (classical) samples the reach is measured by re-solving for the state
/// pushed out to the PSD boundary along the same ray.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub stream_index: u64,
    pub r: f64,
    pub k_max: f64,
    pub r_l: f64,
    pub duality_gap: f64,
    pub residual: f64,
    pub status: LpStatus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub twice_j: u32,
    pub n_samples: u64,
    pub dict_size: usize,
    pub seed: u64,
    pub refine_rounds: usize,
    /// Minimum classical reach over all samples: the numerical estimate of
    /// the largest ball of classical states around the mixed state.
    pub r_tilde_max: f64,
    pub per_sample: Vec<SampleOutcome>,
    pub wall_time_seconds: f64,
}

/// Everything needed to replay a run: flags, algorithm versions, results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub generator_version: String,
    pub solver_version: String,
    pub estimates: Vec<RadiusEstimate>,
}

/// Closed-form table rows for `2j = 1 ..= twice_j_max`.
pub fn bound_table(twice_j_max: u32) -> Result<Vec<BoundRecord>> {
    (1..=twice_j_max)
        .map(|tj| Ok(bound_record(SpinJ::from_twice(tj)?)))
        .collect()
}

/// Shortest-roundtrip decimal formatting; identical inputs give identical
/// bytes, which makes whole CSV files byte-comparable across runs.
fn fmt_f64(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").expect("formatting cannot fail");
    s
}

pub fn bound_table_csv(rows: &[BoundRecord]) -> String {
    let mut out = String::from("twice_j,r_hat_max,p_tilde_max,gurvits\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.j.twice(),
            fmt_f64(r.r_hat_max),
            fmt_f64(r.p_tilde_max),
            fmt_f64(r.gurvits_radius)
        )
        .expect("string write");
    }
    out
}

fn stream_for_dictionary(seed: u64) -> RandomStream {
    // dictionary noise must not overlap sample streams, which count up from 0
    RandomStream::new(seed, u64::MAX)
}

/// Pushes a state out along its ray from the mixed state to the boundary of
/// the positive-semidefinite cone. Used when a sample is itself classical:
/// the reach of its direction lies between the sample and this state.
fn extend_to_psd_boundary(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let uniform = 1.0 / rho.dim() as f64;
    let mu_min = *rho
        .eigenvalues()
        .last()
        .expect("spectrum of a nonempty matrix");
    let denom = uniform - mu_min;
    if denom < 1e-12 {
        return Err(Error::ZeroDirection);
    }
    // smallest eigenvalue hits zero at uniform / denom; stay a hair inside
    let lam = uniform / denom * (1.0 - 1e-9);
    let m0 = maximally_mixed(rho.j());
    let entries = m0.entries() + (rho.entries() - m0.entries()).map(|e| e * lam);
    DensityMatrix::new(rho.j(), entries)
}

fn solve_sample(
    rho: &DensityMatrix,
    dict: &Dictionary,
    refine_rounds: usize,
    stream_index: u64,
) -> Result<SampleOutcome> {
    let solver = InteriorPoint::default();
    let (res, _) = refine_columns_with(rho, dict, refine_rounds, &solver)?;
    let r = distance_to_mixed(rho);
    let too_small = || Error::DictionaryTooSmall {
        got: dict.len(),
        need: dict.j().dim() * dict.j().dim(),
    };
    let mut duality_gap = res.duality_gap;
    let mut residual = res.residual;
    let r_l = match res.status {
        LpStatus::CappedAtOne => {
            // the sample is classical, so its ray reaches at least to the
            // sample itself; measure the actual reach by re-solving for the
            // state pushed out to the PSD boundary
            let ext = extend_to_psd_boundary(rho)?;
            let (res_ext, _) = refine_columns_with(&ext, dict, refine_rounds, &solver)?;
            duality_gap = duality_gap.max(res_ext.duality_gap);
            residual = residual.max(res_ext.residual);
            let r_ext = distance_to_mixed(&ext);
            match res_ext.status {
                // classical all the way out: the PSD boundary is the reach
                LpStatus::CappedAtOne => r_ext,
                LpStatus::Optimal => res_ext.k_max * r_ext,
                LpStatus::InfeasibleAtZero => return Err(too_small()),
            }
        }
        LpStatus::Optimal => res.k_max * r,
        LpStatus::InfeasibleAtZero => return Err(too_small()),
    };
    Ok(SampleOutcome {
        stream_index,
        r,
        k_max: res.k_max,
        r_l,
        duality_gap,
        residual,
        status: res.status,
    })
}

/// Monte-Carlo estimate of the classical-ball radius: `n_samples` random
/// states, each solved for its `k_max`; the minimum reach over samples upper
/// bounds the true radius from above while every reach stays above the
/// closed-form lower bound.
pub fn estimate_radius(
    twice_j: u32,
    n_samples: u64,
    dict_size: usize,
    seed: u64,
    refine_rounds: usize,
) -> Result<RadiusEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidSpin("need at least one sample".into()));
    }
    let start = Instant::now();
    let j = SpinJ::from_twice(twice_j)?;
    let dict = generate_dictionary(j, dict_size, &stream_for_dictionary(seed))?;
    let per_sample: Vec<SampleOutcome> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let rho = hs_random_state(j, &RandomStream::new(seed, i));
            solve_sample(&rho, &dict, refine_rounds, i)
        })
        .collect::<Result<Vec<_>>>()?;
    let r_tilde_max = per_sample
        .iter()
        .map(|s| s.r_l)
        .fold(f64::INFINITY, f64::min);
    Ok(RadiusEstimate {
        twice_j,
        n_samples,
        dict_size,
        seed,
        refine_rounds,
        r_tilde_max,
        per_sample,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Report for one user-supplied density matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub twice_j: u32,
    pub k_max: f64,
    pub status: LpStatus,
    pub r: f64,
    pub r_l: f64,
    pub r_hat_max: f64,
    pub duality_gap: f64,
    pub residual: f64,
    pub decomposition: Vec<DecompositionAtom>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecompositionAtom {
    pub weight: f64,
    pub theta: f64,
    pub phi: f64,
}

pub fn classify_state(
    rho: &DensityMatrix,
    dict_size: usize,
    seed: u64,
    refine_rounds: usize,
) -> Result<ClassifyReport> {
    let j = rho.j();
    let dict = generate_dictionary(j, dict_size, &stream_for_dictionary(seed))?;
    let solver = InteriorPoint::default();
    let (res, used) = refine_columns_with(rho, &dict, refine_rounds, &solver)?;
    let r = distance_to_mixed(rho);
    let r_l = if res.status == LpStatus::CappedAtOne {
        r
    } else {
        res.k_max * r
    };
    let decomposition = extract_decomposition(&res, &used)
        .into_iter()
        .map(|(weight, dir)| DecompositionAtom {
            weight,
            theta: dir.theta(),
            phi: dir.phi(),
        })
        .collect();
    Ok(ClassifyReport {
        twice_j: j.twice(),
        k_max: res.k_max,
        status: res.status,
        r,
        r_l,
        r_hat_max: r_hat_max(j),
        duality_gap: res.duality_gap,
        residual: res.residual,
        decomposition,
    })
}

/// MPS dump of the LP for a state over a freshly generated dictionary.
pub fn mps_dump(rho: &DensityMatrix, dict_size: usize, seed: u64) -> Result<String> {
    let dict = generate_dictionary(rho.j(), dict_size, &stream_for_dictionary(seed))?;
    Ok(build_lp(rho, &dict).to_mps("classicality"))
}

/// Figure data: one row per spin, ordered by `twice_j`, with the estimated
/// radius between the closed-form lower bound and the comparison curve.
pub fn emit_figure_data(estimates: &[RadiusEstimate]) -> Result<String> {
    let mut rows: Vec<&RadiusEstimate> = estimates.iter().collect();
    rows.sort_by_key(|e| e.twice_j);
    let mut out = String::from("twice_j,r_hat_max,r_tilde_max,gurvits\n");
    for e in rows {
        let j = SpinJ::from_twice(e.twice_j)?;
        let rec = bound_record(j);
        writeln!(
            out,
            "{},{},{},{}",
            e.twice_j,
            fmt_f64(rec.r_hat_max),
            fmt_f64(e.r_tilde_max),
            fmt_f64(rec.gurvits_radius)
        )
        .expect("string write");
    }
    Ok(out)
}

/// Writes `contents` to `path`, mapping failures to library errors.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(Error::from)
}

pub fn run_record(command: String, estimates: Vec<RadiusEstimate>) -> RunRecord {
    RunRecord {
        command,
        generator_version: GENERATOR_VERSION.to_string(),
        solver_version: SOLVER_VERSION.to_string(),
        estimates,
    }
}

/// Sidecar path for the replay record: `out.csv` -> `out.run.json`.
pub fn run_record_path(out: &Path) -> std::path::PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    out.with_file_name(format!("{stem}.run.json"))
}

/// Reapplies `res` weights to check the mixture equality; exposed for tests.
pub fn solve_outcome_is_certified(res: &KmaxResult) -> bool {
    match res.status {
        LpStatus::Optimal | LpStatus::CappedAtOne => {
            res.duality_gap < 1e-7 && res.residual < 1e-6
        }
        LpStatus::InfeasibleAtZero => false,
    }
}
