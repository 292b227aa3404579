use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use catent_cli::config::validate;
use catent_cli::{
    emit_batch, emit_report, exit, list_builtin_models, load_batch, load_config_file, preset, run_batch, run_scenario,
    series_csv, CliError, Format, RunOptions, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "catent", version, about = "Categorical entropy bounds versus spectral radii of induced actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check configs without running them.
    Validate(Source),
    /// Run scenarios and emit reports.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time in reports.
        #[arg(long)]
        timing: bool,
    },
    /// List the built-in presets.
    Catalog {
        #[arg(long, default_value = "table")]
        format: Format,
    },
    /// Print the series of one scenario as csv.
    Series {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<String>,
    /// File with a `[[scenario]]` array.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Every built-in preset.
    #[arg(long)]
    all_presets: bool,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    m_max: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn scenarios(src: &Source, o: Option<&Overrides>) -> Result<Vec<ScenarioConfig>, CliError> {
    let cfgs = if let Some(p) = &src.config {
        vec![load_config_file(p)?]
    } else if let Some(name) = &src.preset {
        vec![preset(name)?]
    } else if let Some(p) = &src.batch {
        load_batch(&read(p)?)?
    } else {
        list_builtin_models().iter().map(|p| preset(p.name)).collect::<Result<_, _>>()?
    };
    Ok(match o {
        Some(o) => cfgs.into_iter().map(|c| c.with_overrides(o.tol, o.m_max, o.seed)).collect(),
        None => cfgs,
    })
}

fn single(src: &Source) -> bool {
    src.config.is_some() || src.preset.is_some()
}

fn write_out(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Validate(src) => {
            let cfgs = scenarios(&src, None)?;
            let mut violations = Vec::new();
            for (i, cfg) in cfgs.iter().enumerate() {
                for mut v in validate(cfg) {
                    if cfgs.len() > 1 {
                        v.field = format!("scenario[{i}].{}", v.field);
                    }
                    violations.push(v);
                }
            }
            if !violations.is_empty() {
                return Err(CliError::Invalid(violations));
            }
            println!("ok: {} scenario(s) valid", cfgs.len());
            Ok(exit::SUCCESS)
        }
        Command::Run {
            source,
            overrides,
            format,
            out,
            timing,
        } => {
            let cfgs = scenarios(&source, Some(&overrides))?;
            let opts = RunOptions { timing };
            let (text, code) = if single(&source) {
                let r = run_scenario(&cfgs[0], opts)?;
                (emit_report(&r, format), r.exit_code())
            } else {
                let rs = run_batch(&cfgs, opts)?;
                let code = rs.iter().map(|r| r.exit_code()).max().unwrap_or(exit::SUCCESS);
                (emit_batch(&rs, format), code)
            };
            write_out(&text, out.as_deref())?;
            if let Some(e) = text_error(code) {
                eprintln!("{e}");
            }
            Ok(code)
        }
        Command::Catalog { format } => {
            let text = match format {
                Format::Table => list_builtin_models()
                    .iter()
                    .map(|p| format!("{:<18}{}\n", p.name, p.description))
                    .collect(),
                Format::Json => {
                    let items: Vec<_> = list_builtin_models()
                        .iter()
                        .map(|p| serde_json::json!({ "name": p.name, "description": p.description }))
                        .collect();
                    serde_json::to_string_pretty(&items).expect("catalog serializes") + "\n"
                }
            };
            print!("{text}");
            Ok(exit::SUCCESS)
        }
        Command::Series { source, overrides, out } => {
            if !single(&source) {
                return Err(CliError::Usage("series takes --config or --preset".into()));
            }
            let cfg = scenarios(&source, Some(&overrides))?.remove(0);
            let r = run_scenario(&cfg, RunOptions::default())?;
            if let Some(e) = &r.error {
                return Err(CliError::Engine(engine_error(&e.class, &e.message)));
            }
            write_out(&series_csv(&r), out.as_deref())?;
            Ok(exit::SUCCESS)
        }
    }
}

fn text_error(code: u8) -> Option<&'static str> {
    match code {
        exit::NUMERIC => Some("error: numeric failure, see report"),
        exit::CONTRACT => Some("error: contract violation, see report"),
        exit::INPUT => Some("error: invalid input, see report"),
        _ => None,
    }
}

fn engine_error(class: &str, message: &str) -> catent_core::Error {
    use catent_core::Error as E;
    let m = message.to_string();
    match class {
        "numeric" => E::Numeric(m),
        "resource" => E::Resource(m),
        "contract" | "collapse" => E::Contract(m),
        _ => E::Input(m),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
