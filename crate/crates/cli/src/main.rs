use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use elastmix::converge::{run_convergence, ConvergenceReport, DEFAULT_MAX_DOFS};
use elastmix::mesh::{macro_split, unit_cube_mesh, unit_square_mesh, MeshFile, SplitKind};
use elastmix::spaces::StressFamily;
use elastmix::verify::{
    infsup_report, random_geometry_certificate, rank_certificate, sequence_audit, unisolvence_check, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(name = "elastmix", version, about = "Macro-element mixed methods for linear elasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study on the manufactured problem; writes CSV.
    Converge {
        #[arg(long)]
        problem: StressFamily,
        #[arg(long)]
        levels: usize,
        /// Output path, or `-` for stdout.
        #[arg(long)]
        out: PathBuf,
        /// Refuse levels with more stress unknowns than this.
        #[arg(long, default_value_t = DEFAULT_MAX_DOFS)]
        max_dofs: usize,
    },
    /// Runs verification checks and prints a JSON report. Exits 0 iff all pass.
    Verify {
        target: Target,
        #[arg(long)]
        family: Option<StressFamily>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Highest refinement level for `infsup` (2D) and `sequence`.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Writes a unit square or cube mesh, optionally macro-split, as JSON.
    Mesh {
        #[arg(long)]
        kind: MeshKind,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value = "none")]
        split: SplitKind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Rank,
    Infsup,
    Unisolvence,
    Sequence,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKind {
    Square,
    Cube,
}

const SPLIT_FAMILIES: [StressFamily; 3] = [StressFamily::TwoDP2, StressFamily::ThreeDP3, StressFamily::ThreeDP2];

fn write_out(out: &PathBuf, text: &str) -> elastmix::Result<()> {
    if out.as_os_str() == "-" {
        print!("{text}");
    } else {
        fs::write(out, text)?;
    }
    Ok(())
}

fn converge(problem: StressFamily, levels: usize, out: &PathBuf, max_dofs: usize) -> elastmix::Result<()> {
    if levels < 2 {
        return Err(elastmix::Error::InvalidInput("a convergence study needs at least 2 levels".into()));
    }
    eprintln!("{}", ConvergenceReport::CSV_HEADER);
    let report = run_convergence(problem, levels, max_dofs, |row| eprintln!("{}", ConvergenceReport::csv_row(row)))?;
    write_out(out, &report.to_csv())
}

fn families(family: Option<StressFamily>) -> Vec<StressFamily> {
    family.map_or_else(|| SPLIT_FAMILIES.to_vec(), |f| vec![f])
}

fn verify_rank(family: Option<StressFamily>, trials: usize, seed: u64) -> elastmix::Result<(bool, Value)> {
    let mut pass = true;
    let mut out = Vec::new();
    for f in families(family) {
        let reference = rank_certificate(f)?;
        let random = if trials > 0 { random_geometry_certificate(f, trials, seed)? } else { Vec::new() };
        let ok = reference.pass && random.iter().all(|c| c.pass);
        pass &= ok;
        // Geometry is only worth printing for failures.
        let failures: Vec<_> = random.iter().filter(|c| !c.pass).collect();
        out.push(json!({
            "family": f,
            "reference": reference,
            "trials": random.len(),
            "trials_passed": random.len() - failures.len(),
            "min_sv_gap": random.iter().map(|c| c.sv_gap).fold(reference.sv_gap, f64::min),
            "failures": failures,
            "pass": ok,
        }));
    }
    Ok((pass, Value::Array(out)))
}

fn verify_infsup(family: Option<StressFamily>, levels: Option<usize>) -> elastmix::Result<(bool, Value)> {
    let mut pass = true;
    let mut out = Vec::new();
    for f in families(family) {
        let n = if f.dim() == 2 { levels.unwrap_or(3) } else { 1 };
        let r = infsup_report(f, n)?;
        pass &= r.pass;
        out.push(serde_json::to_value(&r)?);
    }
    Ok((pass, Value::Array(out)))
}

fn verify_sequence(levels: Option<usize>) -> elastmix::Result<(bool, Value)> {
    let mut pass = true;
    let mut out = Vec::new();
    for level in 1..=levels.unwrap_or(2) {
        let r = sequence_audit(&macro_split(&unit_square_mesh(level), SplitKind::TwoDP2)?)?;
        pass &= r.pass;
        out.push(json!({ "level": level, "report": r }));
    }
    Ok((pass, Value::Array(out)))
}

fn verify(
    target: Target,
    family: Option<StressFamily>,
    seed: u64,
    trials: usize,
    levels: Option<usize>,
) -> elastmix::Result<(bool, Value)> {
    if family == Some(StressFamily::ThreeDP2Flat) && matches!(target, Target::Rank | Target::Infsup) {
        return Err(elastmix::Error::InvalidInput("3d-p2-flat has no macro bubbles to certify".into()));
    }
    let mut report = serde_json::Map::new();
    let mut pass = true;
    let mut run = |name: &str, r: elastmix::Result<(bool, Value)>| -> elastmix::Result<()> {
        let (ok, v) = r?;
        pass &= ok;
        report.insert(name.to_string(), v);
        Ok(())
    };
    let all = target == Target::All;
    if all || target == Target::Rank {
        run("rank", verify_rank(family, trials, seed))?;
    }
    if all || target == Target::Unisolvence {
        run("unisolvence", unisolvence_check(trials, seed).map(|r| (r.pass, serde_json::to_value(&r).unwrap())))?;
    }
    if all || target == Target::Sequence {
        run("sequence", verify_sequence(levels))?;
    }
    if all || target == Target::Infsup {
        run("infsup", verify_infsup(family, levels))?;
    }
    report.insert("seed".into(), json!(seed));
    report.insert("pass".into(), json!(pass));
    Ok((pass, Value::Object(report)))
}

fn mesh(kind: MeshKind, levels: usize, split: SplitKind, out: &PathBuf) -> elastmix::Result<()> {
    if levels == 0 {
        return Err(elastmix::Error::InvalidInput("levels must be positive".into()));
    }
    let coarse = match kind {
        MeshKind::Square => unit_square_mesh(levels),
        MeshKind::Cube => unit_cube_mesh(levels),
    };
    let file = if split == SplitKind::None {
        MeshFile::from_mesh(&coarse)
    } else {
        MeshFile::from_macro_mesh(&macro_split(&coarse, split)?)
    };
    write_out(out, &file.to_json()?)
}

fn configure_threads() {
    if let Some(n) = std::env::var("ELASTMIX_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Converge { problem, levels, out, max_dofs } => converge(problem, levels, &out, max_dofs).map(|_| true),
        Command::Verify { target, family, seed, trials, levels } => {
            verify(target, family, seed, trials, levels).and_then(|(pass, v)| {
                println!("{}", serde_json::to_string_pretty(&v)?);
                Ok(pass)
            })
        }
        Command::Mesh { kind, levels, split, out } => mesh(kind, levels, split, &out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
