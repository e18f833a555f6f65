//! Thin command-line front end: argument parsing, config assembly, and
//! dispatch to the command implementations in the library.

use std::process::ExitCode;

use georhythm::io::commands;
use georhythm::io::config::RunConfig;
use georhythm::{Error, Result};

const USAGE: &str = "\
georhythm — rhythmic trajectory imitation on curved surfaces

Usage: georhythm <command> [--config PATH] [--KEY VALUE]...

Commands:
  fit-atlas       Fit a spherelet atlas to a point cloud; write its JSON summary
  imitate         Learn a demonstration and predict query times (CSV + eval JSON)
  gen-demo        Write a synthetic demonstration trajectory CSV
  bench-geodesic  Compare spherelet distances to the mesh shortest-path oracle
  check-pattern   Measure a trajectory's periodicity / drift residuals
  evaluate        Score a predicted trajectory against ground truth

Every configuration key doubles as a flag of the same name, overriding the
config file: e.g. --kernel.type per --lambda 0.01 --grid.nv 3.

Keys (defaults in parentheses):
  kernel.type (se) se|per|qp      kernel.sigma_s (5), kernel.l_s (20)
  kernel.sigma_p (1), kernel.l_p (0.5), kernel.period (150)
  lambda (0.01)
  decoder.step_size (0.1), decoder.max_iterations (500)
  decoder.tolerance (1e-8), decoder.init (previous) previous|nearest
  decoder.line_search (on)
  grid.nv (0), grid.nh (0), grid.v_lines, grid.h_lines (comma lists)
  input.cloud, input.demo, queries (\"start:step:end\" or comma list)
  out (.)
  demo.shape (infinity) c_shape|infinity|spiral, demo.samples (20),
  demo.periods (6), demo.center (0,0,0), demo.radius (1)
  bench.pairs (50), bench.mesh (200), bench.seed (7)
  pattern.kind (periodic), pattern.period, pattern.tolerance (1e-6)
  eval.pred, eval.truth, eval.train_n, eval.distance (arccos) arccos|atlas

Angles are radians; lengths are in the input data's units.
Exit codes: 0 success, 2 configuration error, 3 input-data error,
4 numerical failure.
";

fn parse_args(args: &[String]) -> Result<(String, RunConfig)> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        print!("{USAGE}");
        std::process::exit(0);
    }
    let command = args[0].clone();
    let mut config_path = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let Some(key) = arg.strip_prefix("--") else {
            return Err(Error::Config(format!(
                "unexpected argument '{arg}' (expected --key value)"
            )));
        };
        if key == "help" {
            print!("{USAGE}");
            std::process::exit(0);
        }
        let Some(value) = args.get(i + 1) else {
            return Err(Error::Config(format!("flag --{key} needs a value")));
        };
        if key == "config" {
            config_path = Some(value.clone());
        } else {
            overrides.push((key.to_string(), value.clone()));
        }
        i += 2;
    }
    let mut cfg = RunConfig::default();
    if let Some(path) = config_path {
        cfg.apply_file(path)?;
    }
    for (key, value) in &overrides {
        cfg.set(key, value)?;
    }
    Ok((command, cfg))
}

fn run(command: &str, cfg: &RunConfig) -> Result<()> {
    match command {
        "fit-atlas" => {
            let (summary, path) = commands::cmd_fit_atlas(cfg)?;
            println!(
                "fit-atlas: {} cells fitted, {} empty, {} degenerate -> {}",
                summary.cells_fitted,
                summary.cells_empty,
                summary.cells_degenerate,
                path.display()
            );
        }
        "imitate" => {
            let outcome = commands::cmd_imitate(cfg)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("imitate: wrote {}", outcome.predicted_path.display());
            if let (Some(path), Some(report)) = (&outcome.eval_path, &outcome.report) {
                match report.c_g {
                    Some(cg) => println!(
                        "imitate: c_t = {:.6e}, c_g = {:.6e} ({}) -> {}",
                        report.c_t,
                        cg,
                        report.distance_kind,
                        path.display()
                    ),
                    None => println!(
                        "imitate: c_t = {:.6e} ({}) -> {}",
                        report.c_t,
                        report.distance_kind,
                        path.display()
                    ),
                }
            }
        }
        "gen-demo" => {
            let path = commands::cmd_gen_demo(cfg)?;
            println!("gen-demo: wrote {}", path.display());
        }
        "bench-geodesic" => {
            let (summary, path) = commands::cmd_bench_geodesic(cfg)?;
            println!(
                "bench-geodesic: {} pairs, mean rel err {:.4}, max {:.4}, speedup {:.1}x -> {}",
                summary.pairs,
                summary.mean_relative_error,
                summary.max_relative_error,
                summary.speedup,
                path.display()
            );
        }
        "check-pattern" => {
            let (out, path) = commands::cmd_check_pattern(cfg)?;
            println!(
                "check-pattern: kind={} residual={:.3e} colinearity={:.3e} classified={} passes={} -> {}",
                out.kind,
                out.residual,
                out.colinearity_defect,
                out.classified,
                out.passes,
                path.display()
            );
        }
        "evaluate" => {
            let (report, path) = commands::cmd_evaluate(cfg)?;
            match report.c_g {
                Some(cg) => println!(
                    "evaluate: c_t = {:.6e}, c_g = {:.6e} ({}) -> {}",
                    report.c_t,
                    cg,
                    report.distance_kind,
                    path.display()
                ),
                None => println!(
                    "evaluate: c_t = {:.6e} ({}) -> {}",
                    report.c_t,
                    report.distance_kind,
                    path.display()
                ),
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown command '{other}' (see --help)"
            )))
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (command, cfg) = match parse_args(&args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
