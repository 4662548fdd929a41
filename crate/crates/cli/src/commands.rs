use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use streamrank::baselines::{compare, write_comparison_csv, Method, ScoringOptions};
use streamrank::features::{
    column_names, feature_names, read_capture, read_feature_csv, write_feature_csv, ExtractedRecord,
};
use streamrank::model::{rank_features, Checkpoint};
use streamrank::stream::{bounded, EngineConfig, ReportWriter, StreamEngine};
use streamrank::synth::{generate, planted_weights, DriftSchedule, RegimeSpec};
use streamrank::{Error, Example, Hyperparams, LabeledExample, Model};

use crate::args::{ModelArgs, RankFormat, RunArgs, SynthArgs};
use crate::error::{output, CliError, CliResult};
use crate::manifest::{digest_inputs, digest_outputs, unix_now, RunManifest};

const PCAP_MAGICS: [[u8; 4]; 4] =
    [[0xd4, 0xc3, 0xb2, 0xa1], [0xa1, 0xb2, 0xc3, 0xd4], [0x4d, 0x3c, 0xb2, 0xa1], [0xa1, 0xb2, 0x3c, 0x4d]];

/// Decoder-to-engine buffer for pcap input.
const PIPELINE_CAPACITY: usize = 4096;

fn is_pcap(path: &Path) -> CliResult<bool> {
    let mut magic = [0u8; 4];
    let mut f = File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let n = f.read(&mut magic).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(n == 4 && PCAP_MAGICS.contains(&magic))
}

/// Extractor columns get their descriptive names; other CSVs keep theirs.
fn display_names(columns: &[String]) -> Vec<String> {
    if columns == column_names().as_slice() {
        feature_names()
    } else {
        columns.to_vec()
    }
}

type RecordStream = Box<dyn Iterator<Item = streamrank::Result<ExtractedRecord>>>;

fn open_records(input: &Path, labels: Option<&Path>) -> CliResult<(Vec<String>, RecordStream)> {
    if is_pcap(input)? {
        let capture = read_capture(input, labels)?;
        Ok((feature_names(), Box::new(bounded(capture, PIPELINE_CAPACITY))))
    } else {
        if labels.is_some() {
            return Err(CliError::input("--labels applies to pcap input only; CSV rows carry their own label"));
        }
        let table = read_feature_csv(input)?;
        Ok((display_names(&table.columns), Box::new(table.records.into_iter().map(Ok))))
    }
}

fn hyperparams(m: &ModelArgs) -> CliResult<Hyperparams<f64>> {
    Ok(Hyperparams::new(m.lambda, m.alpha, m.batch_size)?)
}

pub fn extract(pcap: &Path, labels: Option<&Path>, out: &Path) -> CliResult<()> {
    let mut capture = read_capture(pcap, labels)?;
    let n = write_feature_csv(capture.by_ref(), out)?;
    let stats = capture.stats();
    info!("wrote {n} records ({} packets, {} skipped)", stats.packets, stats.skipped);
    if stats.skipped > 0 {
        warn!("{} packets could not be decoded and were skipped", stats.skipped);
    }
    Ok(())
}

pub fn run(args: &RunArgs) -> CliResult<()> {
    let started = unix_now();
    let config = EngineConfig {
        window_size: args.window_size,
        mse_threshold: args.mse_threshold,
        pretrain_windows: args.pretrain_windows,
        pretrain_epochs: args.pretrain_epochs,
        epochs_per_retrain: args.epochs,
        hyperparams: hyperparams(&args.model)?,
        seed: args.model.seed,
        frozen: args.frozen,
        record_timing: args.timing,
    };
    config.validate()?;
    let mut inputs = vec![args.input.as_path()];
    inputs.extend(args.labels.as_deref());
    let input_digests = digest_inputs(&inputs)?;

    let (names, records) = open_records(&args.input, args.labels.as_deref())?;
    fs::create_dir_all(&args.out_dir).map_err(|e| output("creating output directory", e))?;
    let ckpt_dir = args.out_dir.join("checkpoints");
    if args.checkpoint_every > 0 {
        fs::create_dir_all(&ckpt_dir).map_err(|e| output("creating checkpoint directory", e))?;
    }
    let reports_path = args.out_dir.join("reports.jsonl");
    let file = File::create(&reports_path).map_err(|e| output("creating report file", e))?;
    let mut reports = ReportWriter::new(BufWriter::new(file), args.top_k);

    let mut engine = StreamEngine::new(config, names.clone())?;
    let (mut windows, mut retrains) = (0usize, 0usize);
    let mut written = Vec::new();
    engine.run(records, |report, model| {
        reports.write(report)?;
        windows += 1;
        retrains += usize::from(report.retrained);
        if args.checkpoint_every > 0 && (report.window_index + 1) % args.checkpoint_every == 0 {
            let p = ckpt_dir.join(format!("window-{:06}.json", report.window_index));
            Checkpoint::from_model(model, &names)?.save(&p)?;
            written.push(p);
        }
        Ok(())
    })?;
    reports.into_inner().flush().map_err(|e| output("writing reports", e))?;
    info!("{windows} windows, {retrains} retrains");

    let model_path = args.out_dir.join("model.json");
    Checkpoint::from_model(engine.model(), &names)?.save(&model_path).map_err(|e| output("writing model", e))?;

    let mut outs: Vec<&Path> = vec![&reports_path, &model_path];
    outs.extend(written.iter().map(PathBuf::as_path));
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "run",
        seed: args.model.seed,
        config: json!({
            "window_size": args.window_size,
            "mse_threshold": args.mse_threshold,
            "pretrain_windows": args.pretrain_windows,
            "pretrain_epochs": args.pretrain_epochs,
            "epochs": args.epochs,
            "model": args.model,
            "frozen": args.frozen,
            "top_k": args.top_k,
            "checkpoint_every": args.checkpoint_every,
            "timing": args.timing,
        }),
        inputs: input_digests,
        outputs: digest_outputs(&outs)?,
        started_unix_s: started,
        finished_unix_s: unix_now(),
    };
    manifest.save(&args.out_dir.join("manifest.json"))
}

pub fn train(input: &Path, labels: Option<&Path>, model: &ModelArgs, epochs: usize, out: &Path) -> CliResult<()> {
    let hp = hyperparams(model)?;
    let (names, records) = open_records(input, labels)?;
    let mut labeled = Vec::new();
    let mut unlabeled = 0usize;
    for r in records {
        let r = r?;
        if r.label.is_some() {
            labeled.push(r);
        } else {
            unlabeled += 1;
        }
    }
    if unlabeled > 0 {
        warn!("ignoring {unlabeled} unlabeled records");
    }
    let config = EngineConfig {
        window_size: hp.batch_size,
        pretrain_epochs: epochs.max(1),
        hyperparams: hp,
        seed: model.seed,
        ..EngineConfig::default()
    };
    let mut engine = StreamEngine::new(config, names.clone())?;
    engine.pretrain(&labeled)?;
    Checkpoint::from_model(engine.model(), &names)?.save(out).map_err(|e| output("writing model", e))?;
    info!("trained on {} records", labeled.len());
    Ok(())
}

pub fn rank(checkpoint: &Path, top_k: Option<usize>, format: RankFormat) -> CliResult<()> {
    let ckpt = Checkpoint::load(checkpoint)?;
    let model: Model = ckpt.to_model()?;
    let mut ranking = rank_features(&model, &ckpt.feature_names)?;
    ranking.entries.truncate(top_k.unwrap_or(usize::MAX).min(ranking.len()));
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let res = match format {
        RankFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &ranking).map_err(io::Error::other).and_then(|_| writeln!(out))
        }
        RankFormat::Table => (|| {
            writeln!(out, "{:>4}  {:>5}  {:<20}  {:>24}", "rank", "index", "feature", "weight")?;
            for e in &ranking.entries {
                writeln!(out, "{:>4}  {:>5}  {:<20}  {:>24}", e.rank, e.index, e.name, e.weight)?;
            }
            writeln!(out, "bias {}", ranking.bias)
        })(),
    };
    res.map_err(|e| output("writing ranking", e))
}

fn labeled_examples(records: Vec<ExtractedRecord>) -> Vec<Example> {
    let total = records.len();
    let examples: Vec<Example> = records
        .into_iter()
        .filter_map(|r| {
            let y = r.label?;
            let mut x = r.features;
            x.push(1.0);
            Some(LabeledExample::new(x, y))
        })
        .collect();
    if examples.len() < total {
        warn!("ignoring {} unlabeled records", total - examples.len());
    }
    examples
}

#[allow(clippy::too_many_arguments)]
pub fn compare_cmd(
    csv: &Path,
    k: usize,
    methods: &[String],
    train_frac: f64,
    bins: usize,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<()> {
    let methods = methods.iter().map(|m| m.trim().parse::<Method>()).collect::<Result<Vec<_>, Error>>()?;
    let table = read_feature_csv(csv)?;
    let data = labeled_examples(table.records);
    let opts = ScoringOptions { bins, seed, ..ScoringOptions::default() };
    let rows = compare(&data, k, &methods, &opts, train_frac)?;
    let res = match out {
        Some(p) => File::create(p).map_err(Error::from).and_then(|f| write_comparison_csv(&rows, BufWriter::new(f))),
        None => write_comparison_csv(&rows, io::stdout().lock()),
    };
    res.map_err(|e| output("writing comparison", e))?;
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::input("every method failed"));
    }
    Ok(())
}

pub fn synth_generate(args: &SynthArgs) -> CliResult<()> {
    if args.windows == 0 || args.window_size == 0 {
        return Err(CliError::input("--windows and --window-size must be >= 1"));
    }
    if args.planted == 0 || args.planted > feature_names().len() {
        return Err(CliError::input(format!("--planted must be in 1..={}", feature_names().len())));
    }
    let mut cuts: Vec<usize> = args.drift_at.clone();
    cuts.sort_unstable();
    cuts.dedup();
    if cuts.iter().any(|&c| c == 0 || c >= args.windows) {
        return Err(CliError::input("--drift-at indices must lie strictly inside the stream"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (weights, planted) = planted_weights(args.planted, &mut rng);
    let base = RegimeSpec::new(weights, args.noise, 1)?;
    let mut bounds = vec![0];
    bounds.extend(&cuts);
    bounds.push(args.windows);
    let regimes = bounds
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let r = if i % 2 == 0 { base.clone() } else { base.negated() };
            RegimeSpec { duration: w[1] - w[0], ..r }
        })
        .collect();
    let schedule = DriftSchedule::new(regimes)?;
    let n = write_feature_csv(generate(schedule, args.window_size, args.seed).map(Ok), &args.out)?;
    info!("wrote {n} synthetic records");
    if let Some(p) = &args.truth {
        let names = feature_names();
        let truth = json!({
            "seed": args.seed,
            "window_size": args.window_size,
            "noise": args.noise,
            "planted": planted,
            "planted_names": planted.iter().map(|&i| names[i].clone()).collect::<Vec<_>>(),
            "weights": base.true_weights,
            "drift_at": cuts,
        });
        let text = serde_json::to_string_pretty(&truth).map_err(|e| output("truth", e))? + "\n";
        fs::write(p, text).map_err(|e| output("writing truth file", e))?;
    }
    Ok(())
}
