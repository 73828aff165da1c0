use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use uwb_sdp::sim::{parse_decoders, sort_records, write_csv};
use uwb_sdp::{emit_report, run_campaign, CampaignConfig, Scenario};

/// Monte Carlo BER campaigns for joint demodulation and equalization of
/// differential IR-UWB blocks.
#[derive(Parser, Debug)]
#[command(name = "uwb-sdp", version, about)]
struct Args {
    /// Campaign file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Channel preset(s): flat, mild, severe; comma-separated to run several.
    #[arg(long, value_delimiter = ',')]
    scenario: Vec<Scenario>,

    /// Master seed of the trial streams.
    #[arg(long)]
    seed: Option<u64>,

    /// CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Comma-separated subset of exhaustive, sdp_sign, sdp_randomized.
    #[arg(long)]
    decoders: Option<String>,

    /// Blocks simulated per Eb/N0 point.
    #[arg(long)]
    blocks: Option<usize>,

    /// Comma-separated Eb/N0 grid in dB (`inf` for noiseless).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    ebn0: Vec<f64>,

    /// Write measured decode times instead of zeros to the CSV.
    #[arg(long)]
    timing: bool,

    /// Do not print the summary table.
    #[arg(long)]
    quiet: bool,
}

/// Campaigns to run and the CSV destination (flag first, then config file).
fn build_configs(args: &Args) -> uwb_sdp::Result<(Vec<CampaignConfig>, Option<PathBuf>)> {
    let mut base = match &args.config {
        Some(path) => CampaignConfig::load(path)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = args.seed {
        base.master_seed = seed;
    }
    if let Some(d) = &args.decoders {
        base.decoders = parse_decoders(d)?;
    }
    if let Some(b) = args.blocks {
        base.blocks_per_point = b;
    }
    if !args.ebn0.is_empty() {
        base.ebn0_grid_db = args.ebn0.clone();
    }
    if args.timing {
        base.record_timing = true;
    }
    let out_path = args.out.clone().or(base.output_path.take());

    let configs: Vec<CampaignConfig> = if args.scenario.is_empty() {
        vec![base]
    } else {
        args.scenario
            .iter()
            .map(|s| {
                let mut c = base.clone();
                c.channel = s.channel();
                c.scenario_name = s.name().to_string();
                c
            })
            .collect()
    };
    for c in &configs {
        c.validate()?;
    }
    Ok((configs, out_path))
}

fn run(args: &Args) -> uwb_sdp::Result<()> {
    let (configs, out_path) = build_configs(args)?;
    // Open the destination first so a bad path fails before any simulation.
    let sink = out_path
        .as_ref()
        .map(|p| File::create(p).map(BufWriter::new))
        .transpose()?;

    let mut records = Vec::new();
    for c in &configs {
        records.extend(run_campaign(c)?);
    }
    sort_records(&mut records);
    if let Some(sink) = sink {
        write_csv(&records, sink, configs.iter().any(|c| c.record_timing))?;
    }
    if !args.quiet {
        print!("{}", emit_report(&records)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
