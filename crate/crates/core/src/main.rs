use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mtmia::datagen::ToySpec;
use mtmia::evalkit::fidelity_report;
use mtmia::hgnn::EncoderConfig;
use mtmia::pipeline::{
    run_audit, run_decompose_attack, write_toy, AuditConfig, PipelineError, ToyGenerator,
    TOY_NOISE,
};
use mtmia::relgraph::{DatabaseInstance, RelationalSchema};

#[derive(Parser)]
#[command(name = "mtmia", version, about = "Membership inference audits for multi-table synthetic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Memorizing,
    Independent,
}

#[derive(Subcommand)]
enum Command {
    /// Write the customers/transactions toy benchmark and an audit config.
    Toy {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        members: usize,
        #[arg(long, default_value_t = 500)]
        nonmembers: usize,
        #[arg(long, default_value_t = 100)]
        member_children: usize,
        #[arg(long, default_value_t = 1)]
        nonmember_children: usize,
        #[arg(long, default_value_t = 5)]
        customer_dims: usize,
        #[arg(long, default_value_t = 5)]
        transaction_dims: usize,
        #[arg(long, value_enum, default_value_t = Generator::Memorizing)]
        generator: Generator,
        /// Noise scale of the memorizing generator.
        #[arg(long, default_value_t = TOY_NOISE)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Training epochs written into the generated config.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Run the attacks and metrics listed in a config.
    Audit {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Raw-row DCR plus MT-MIA in the parent, context and final spaces.
    DecomposeAttack {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fidelity of a synthetic database against a real one.
    Fidelity {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synth: PathBuf,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<AuditConfig, PipelineError> {
        let mut config = AuditConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(o) = &self.output_dir {
            config.output_dir = o.clone();
        }
        if let Some(e) = self.epochs {
            config.encoder.epochs = e;
        }
        if let Some(c) = &self.checkpoint {
            config.encoder_checkpoint = Some(c.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Toy {
            out,
            members,
            nonmembers,
            member_children,
            nonmember_children,
            customer_dims,
            transaction_dims,
            generator,
            noise,
            seed,
            epochs,
        } => {
            let spec = ToySpec {
                members,
                nonmembers,
                member_children,
                nonmember_children,
                customer_dims,
                transaction_dims,
                seed,
            };
            let generator = match generator {
                Generator::Memorizing => ToyGenerator::Memorizing { noise },
                Generator::Independent => ToyGenerator::Independent,
            };
            let mut encoder = EncoderConfig::default();
            if let Some(e) = epochs {
                encoder.epochs = e;
            }
            let path = write_toy(&out, &spec, generator, encoder)?;
            println!("{}", path.display());
        }
        Command::Audit { run } => {
            let outcome = run_audit(&run.load()?)?;
            for r in &outcome.reports {
                println!(
                    "{:<6} {:<22} auc={:.4} tpr@0={:.4} tpr@1e-3={:.4} tpr@1e-2={:.4}",
                    r.attack,
                    r.space,
                    r.auc,
                    r.tpr_at(0.0).unwrap_or(0.0),
                    r.tpr_at(1e-3).unwrap_or(0.0),
                    r.tpr_at(1e-2).unwrap_or(0.0)
                );
            }
            for w in &outcome.manifest.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::DecomposeAttack { run } => {
            println!("{:<10} {:>8} {:>8} {:>10} {:>10}", "space", "auc", "tpr@0", "tpr@1e-3", "tpr@1e-2");
            for row in run_decompose_attack(&run.load()?)? {
                println!(
                    "{:<10} {:>8.4} {:>8.4} {:>10.4} {:>10.4}",
                    row.space, row.auc, row.tpr_at_0, row.tpr_at_1e_3, row.tpr_at_1e_2
                );
            }
        }
        Command::Fidelity {
            schema,
            real,
            synth,
            out,
        } => {
            let text = fs::read_to_string(&schema).map_err(|e| PipelineError::Io {
                path: schema.display().to_string(),
                message: e.to_string(),
            })?;
            let schema = RelationalSchema::from_json_str(&text)?;
            let real = DatabaseInstance::load_dir(&schema, &real)?;
            let synth = DatabaseInstance::load_dir(&schema, &synth)?;
            let report = fidelity_report(&schema, &real, &synth)?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
            json.push('\n');
            match out {
                Some(p) => fs::write(&p, json).map_err(|e| PipelineError::Io {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?,
                None => print!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
