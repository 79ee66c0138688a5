use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use spinclass::DensityMatrix;
use spinclass_cli::{
    bound_table, bound_table_csv, classify_state, emit_figure_data, estimate_radius, mps_dump,
    run_record, run_record_path, write_file,
};

/// Classicality of spin-j states: closed-form radius bounds, LP-based
/// classification of density matrices, and Monte-Carlo radius estimation.
#[derive(Parser)]
#[command(name = "spinclass", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form bound table for 2j = 1 ..= N as CSV.
    BoundTable {
        #[arg(long, default_value_t = 21)]
        twice_j_max: u32,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify one density matrix (JSON file) as classical or not.
    Classify {
        /// Path to `{"twice_j", "re", "im"}` JSON.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 1000)]
        dict_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        refine: usize,
        /// Write the coherent-state decomposition (JSON) here.
        #[arg(long)]
        decomposition_out: Option<PathBuf>,
        /// Dump the LP in MPS format here.
        #[arg(long)]
        mps_out: Option<PathBuf>,
    },
    /// Monte-Carlo estimate of the classical-ball radius for one spin.
    Radius {
        #[arg(long)]
        twice_j: u32,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Dictionary size; defaults to 20000 for 2j <= 6, 100000 above.
        #[arg(long)]
        dict_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        refine: usize,
        #[arg(long, default_value_t = 0, help = "Worker threads; 0 = all cores")]
        workers: usize,
        /// Output CSV path; a replay record lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Radius estimates over a range of spins plus the closed-form curves.
    Figure {
        #[arg(long, default_value_t = 2)]
        twice_j_min: u32,
        #[arg(long, default_value_t = 9)]
        twice_j_max: u32,
        #[arg(long, default_value_t = 300)]
        samples: u64,
        #[arg(long, default_value_t = 2000)]
        dict_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        refine: usize,
        #[arg(long, default_value_t = 0, help = "Worker threads; 0 = all cores")]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn default_dict_size(twice_j: u32) -> usize {
    if twice_j <= 6 {
        20_000
    } else {
        100_000
    }
}

fn configure_workers(workers: usize) {
    if workers > 0 {
        // ignore failure when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
}

fn load_state(path: &PathBuf) -> Result<DensityMatrix, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    DensityMatrix::from_json(&text).map_err(|e| format!("invalid state {}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::BoundTable { twice_j_max, out } => {
            let rows = bound_table(twice_j_max).map_err(|e| e.to_string())?;
            let csv = bound_table_csv(&rows);
            match out {
                Some(path) => write_file(&path, &csv).map_err(|e| e.to_string())?,
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::Classify {
            state,
            dict_size,
            seed,
            refine,
            decomposition_out,
            mps_out,
        } => {
            let rho = load_state(&state)?;
            if let Some(path) = mps_out {
                let text = mps_dump(&rho, dict_size, seed).map_err(|e| e.to_string())?;
                write_file(&path, &text).map_err(|e| e.to_string())?;
            }
            let report =
                classify_state(&rho, dict_size, seed, refine).map_err(|e| e.to_string())?;
            println!("twice_j      : {}", report.twice_j);
            println!("status       : {:?}", report.status);
            println!("k_max        : {}", report.k_max);
            println!("r            : {}", report.r);
            println!("r_l          : {}", report.r_l);
            println!("r_hat_max    : {}", report.r_hat_max);
            println!("duality_gap  : {:.3e}", report.duality_gap);
            println!("residual     : {:.3e}", report.residual);
            println!("atoms        : {}", report.decomposition.len());
            if let Some(path) = decomposition_out {
                let text = serde_json::to_string_pretty(&report.decomposition)
                    .expect("serializable");
                write_file(&path, &text).map_err(|e| e.to_string())?;
            }
            Ok(())
        }
        Command::Radius {
            twice_j,
            samples,
            dict_size,
            seed,
            refine,
            workers,
            out,
        } => {
            configure_workers(workers);
            let m = dict_size.unwrap_or_else(|| default_dict_size(twice_j));
            let est = estimate_radius(twice_j, samples, m, seed, refine)
                .map_err(|e| e.to_string())?;
            println!(
                "2j = {twice_j}: r_tilde_max = {} over {} samples ({:.1} s)",
                est.r_tilde_max, est.n_samples, est.wall_time_seconds
            );
            let csv = emit_figure_data(std::slice::from_ref(&est)).map_err(|e| e.to_string())?;
            write_file(&out, &csv).map_err(|e| e.to_string())?;
            let record = run_record(
                format!(
                    "radius --twice-j {twice_j} --samples {samples} --dict-size {m} \
                     --seed {seed} --refine {refine}"
                ),
                vec![est],
            );
            let text = serde_json::to_string_pretty(&record).expect("serializable");
            write_file(&run_record_path(&out), &text).map_err(|e| e.to_string())?;
            Ok(())
        }
        Command::Figure {
            twice_j_min,
            twice_j_max,
            samples,
            dict_size,
            seed,
            refine,
            workers,
            out,
        } => {
            if twice_j_min < 1 || twice_j_min > twice_j_max {
                return Err(format!(
                    "invalid spin range 2j = {twice_j_min}..={twice_j_max}"
                ));
            }
            configure_workers(workers);
            let mut estimates = Vec::new();
            for tj in twice_j_min..=twice_j_max {
                let est = estimate_radius(tj, samples, dict_size, seed, refine)
                    .map_err(|e| e.to_string())?;
                println!(
                    "2j = {tj}: r_tilde_max = {} ({:.1} s)",
                    est.r_tilde_max, est.wall_time_seconds
                );
                estimates.push(est);
            }
            let csv = emit_figure_data(&estimates).map_err(|e| e.to_string())?;
            write_file(&out, &csv).map_err(|e| e.to_string())?;
            let record = run_record(
                format!(
                    "figure --twice-j-min {twice_j_min} --twice-j-max {twice_j_max} \
                     --samples {samples} --dict-size {dict_size} --seed {seed} --refine {refine}"
                ),
                estimates,
            );
            let text = serde_json::to_string_pretty(&record).expect("serializable");
            write_file(&run_record_path(&out), &text).map_err(|e| e.to_string())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
