use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use vdm_core::acoustics::{
    azimuth_grid, measure_pattern, pattern_rows, write_pattern_csv, AnalyticCardioid, ArrayGeometry, ArrayProcessor,
    CardioidPattern, ProbeSettings, SimSettings,
};
use vdm_core::baselines::{bin_frequencies, DmaProcessor};
use vdm_core::dataset::{
    build_sample, derive_seed, gen_dataset, ingest_speech, load_sample, read_manifest, sample_scene, synthetic_speech,
    write_sample, DatasetOptions, SceneRanges, SpeechSource, TargetConfig, MANIFEST_FILE, MIN_LOUDNESS_DBFS,
};
use vdm_core::kv::KvConfig;
use vdm_core::metrics::{cvdr, scatter_report, sdr, MetricReport, MetricRow, ScatterSample};
use vdm_core::ndf::{load_checkpoint, save_checkpoint, train as fit, write_loss_trace, NdfProcessor, NetConfig, NetworkParams, TrainConfig};
use vdm_core::signal::{read_wav, write_wav, BitDepth, Stft, StftConfig, Waveform};
use vdm_core::stereo::{
    ild_curve, ild_trend_zero, mean_abs_ild, render_moving_scene, steer_by_swap, stereo_render, write_ild_csv,
    MovingSceneConfig, StereoMode,
};
use vdm_core::targets::oracle_masks;

use crate::{out_dir, record, usage, CliResult, DatasetArgs, EvalArgs, InferArgs, Mode, PatternArgs, SimulateArgs, StereoArgs, TrainArgs};

fn speech_source(dir: Option<&Path>) -> CliResult<SpeechSource> {
    Ok(match dir {
        Some(d) => {
            let cat = ingest_speech(d, MIN_LOUDNESS_DBFS)?;
            for r in &cat.rejected {
                eprintln!("skipped {}: {}", r.path.display(), r.reason);
            }
            SpeechSource::Catalog(cat)
        }
        None => SpeechSource::Synthetic,
    })
}

fn scene_options(kv: &mut KvConfig) -> CliResult<(SceneRanges, TargetConfig)> {
    let mut ranges = SceneRanges::default();
    ranges.apply(kv)?;
    let mut target = TargetConfig::default();
    target.apply(kv)?;
    Ok((ranges, target))
}

/// Parses the config, lets `take` consume its keys, and rejects the rest.
fn configure<T>(kv: &KvConfig, take: impl FnOnce(&mut KvConfig) -> CliResult<T>) -> CliResult<T> {
    let mut rest = kv.clone();
    let v = take(&mut rest).map_err(usage)?;
    rest.finish().map_err(usage)?;
    Ok(v)
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let kv = a.common.load()?;
    let (ranges, target) = configure(&kv, scene_options)?;
    let out = out_dir(&a.out)?;
    let speech = speech_source(a.speech_dir.as_deref())?;
    let seed = derive_seed(a.common.seed, a.split.name(), a.index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = sample_scene(&mut rng, a.split, &ranges, seed)?;
    let sample = build_sample(&scene, a.index, &speech, &target, &SimSettings::default(), ranges.duration_s)?;
    write_sample(out, &sample)?;
    let stft = Stft::<f64>::new(StftConfig::default())?;
    let c = cvdr(&stft.forward(&sample.bundle.z_coh)?, &stft.forward(&sample.bundle.z_diff)?)?;
    println!("{} rt60 {:.2} s, {} sources, CVDR {:.2} dB", sample.record.file, scene.room.rt60, scene.sources.len(), c.db);
    record::write(out, "simulate", a.common.seed, &kv, json!({ "file": sample.record.file, "cvdr_db": c.db }))
}

pub fn dataset(a: DatasetArgs) -> CliResult {
    let kv = a.common.load()?;
    let (ranges, target) = configure(&kv, scene_options)?;
    let out = out_dir(&a.out)?;
    let opts = DatasetOptions {
        n: a.n,
        split: a.split,
        seed: a.common.seed,
        out_dir: out.to_path_buf(),
        ranges,
        target,
        sim: SimSettings::default(),
        speech: speech_source(a.speech_dir.as_deref())?,
        jobs: a.common.jobs,
    };
    let records = gen_dataset(&opts)?;
    println!("{} {} samples in {}", records.len(), a.split, out.display());
    record::write(out, "dataset", a.common.seed, &kv, json!({ "samples": records.len() }))
}

fn load_records(dir: &Path, limit: Option<usize>) -> CliResult<Vec<vdm_core::dataset::SceneManifestRecord>> {
    let mut recs = read_manifest(dir.join(MANIFEST_FILE))?;
    if let Some(n) = limit {
        recs.truncate(n);
    }
    if recs.is_empty() {
        return Err("dataset is empty".into());
    }
    Ok(recs)
}

pub fn train(a: TrainArgs) -> CliResult {
    let kv = a.common.load()?;
    let (net, tc) = configure(&kv, |kv| {
        let mut net = NetConfig::desk(4).with_seed(a.common.seed);
        net.apply(kv)?;
        let mut tc = TrainConfig {
            seed: a.common.seed,
            ..Default::default()
        };
        tc.apply(kv)?;
        Ok((net, tc))
    })?;
    let out = out_dir(&a.out)?;
    let stft = StftConfig::default();
    let items = load_records(&a.data, a.limit)?
        .iter()
        .map(|r| load_sample(a.data.join(&r.file))?.to_train_item::<f32>(stft, r.beta))
        .collect::<vdm_core::Result<Vec<_>>>()?;
    let mut params = NetworkParams::<f32>::init(net)?;
    eprintln!("{} items, {} parameters", items.len(), params.num_params());
    let trace = fit(&mut params, &items, &tc, |r| {
        if r.step % 10 == 0 {
            eprintln!("step {} L_final {:.4}", r.step, r.terms.total);
        }
    })?;
    write_loss_trace(&trace, BufWriter::new(File::create(out.join("loss_trace.csv"))?))?;
    save_checkpoint(&params, out.join("model.ndfp"))?;
    let last = trace.last().map(|r| r.terms.total);
    println!("{} steps, final loss {:?}", trace.len(), last);
    record::write(out, "train", a.common.seed, &kv, json!({ "steps": trace.len(), "final_loss": last }))
}

fn processor(path: &Path, beta: f64) -> CliResult<NdfProcessor> {
    let stft = StftConfig::default();
    let params = load_checkpoint(path, stft.num_bins())?;
    Ok(NdfProcessor::new(params, stft, beta)?)
}

pub fn infer(a: InferArgs) -> CliResult {
    let kv = a.common.load()?;
    configure(&kv, |_| Ok(()))?;
    let out = out_dir(&a.out)?;
    let p = processor(&a.checkpoint, a.beta)?;
    let mut w = read_wav(&a.input)?;
    if w.num_channels() == 7 {
        w = w.select(&[0, 1, 2, 3])?;
    }
    let r = p.run(&steer_by_swap(&w, a.look)?)?;
    let fs = w.sample_rate();
    for (name, x) in [("coh", r.coh), ("diff", r.diff), ("vdm", r.vdm)] {
        write_wav(out.join(format!("{name}.wav")), &Waveform::mono(x, fs)?, BitDepth::Float32)?;
    }
    record::write(out, "infer", a.common.seed, &kv, serde_json::Value::Null)
}

pub fn eval(a: EvalArgs) -> CliResult {
    let kv = a.common.load()?;
    configure(&kv, |_| Ok(()))?;
    let out = out_dir(&a.out)?;
    let stft = Stft::<f64>::new(StftConfig::default())?;
    let model = a.checkpoint.as_deref().map(|p| processor(p, 0.0)).transpose()?;
    let mut report = MetricReport::default();
    let mut kept = Vec::new();
    for r in load_records(&a.data, a.limit)? {
        let s = load_sample(a.data.join(&r.file))?;
        let (coh, diff) = match &model {
            Some(p) => {
                let o = p.run(&s.mics)?;
                (o.coh, o.diff)
            }
            None => {
                let y1 = stft.forward(s.mics.channel(0))?;
                let m = oracle_masks(&y1, &stft.forward(&s.z_coh)?, &stft.forward(&s.z_diff)?)?;
                (stft.inverse(&m.coh.hadamard(&y1)?)?, stft.inverse(&m.diff.hadamard(&y1)?)?)
            }
        };
        let vdm: Vec<f64> = coh.iter().zip(&diff).map(|(c, d)| c + r.beta * d).collect();
        let zc = stft.forward(&s.z_coh)?;
        let zd = stft.forward(&s.z_diff)?;
        let cv = cvdr(&zc, &zd)?.db;
        for (metric, est, reference) in [
            ("sdr_coh", &coh, &s.z_coh),
            ("sdr_diff", &diff, &s.z_diff),
            ("sdr_vdm", &vdm, &s.z_vdm),
        ] {
            report.push(MetricRow {
                scene_id: r.id.clone(),
                rt60: r.rt60,
                metric: metric.into(),
                value_db: sdr(est, reference)?,
                cvdr_db: cv,
            });
        }
        kept.push((zc, zd, vdm, s.z_vdm, r.rt60));
    }
    report.write_csv(BufWriter::new(File::create(out.join("metrics.csv"))?))?;
    let samples: Vec<ScatterSample<'_>> = kept
        .iter()
        .map(|(zc, zd, est, reference, rt60)| ScatterSample {
            z_coh: zc,
            z_diff: zd,
            estimate: est,
            reference,
            rt60: *rt60,
        })
        .collect();
    scatter_report(&samples, BufWriter::new(File::create(out.join("scatter.csv"))?))?;
    let mut summary = serde_json::Map::new();
    for m in ["sdr_coh", "sdr_diff", "sdr_vdm"] {
        if let Some((mean, median)) = report.summary(m) {
            println!("{m}: mean {mean:.2} dB, median {median:.2} dB");
            summary.insert(m.into(), json!({ "mean": mean, "median": median }));
        }
    }
    record::write(out, "eval", a.common.seed, &kv, summary.into())
}

pub fn pattern(a: PatternArgs) -> CliResult {
    let kv = a.common.load()?;
    configure(&kv, |_| Ok(()))?;
    if !(a.analytic || a.dma || a.checkpoint.is_some()) {
        return Err(usage("choose one of --analytic, --dma or --checkpoint"));
    }
    if a.order == 0 || !(a.grid > 0.0) || !(a.fmin < a.fmax) {
        return Err(usage("order, grid and frequency band must be positive and ordered"));
    }
    let reference = CardioidPattern::new(a.order, 30f64.to_radians());
    let geometry = ArrayGeometry::compact_uca();
    let settings = ProbeSettings {
        duration_secs: a.duration,
        seed: a.common.seed,
        ..Default::default()
    };
    let freqs: Vec<f64> = bin_frequencies(settings.stft, settings.sample_rate)
        .into_iter()
        .filter(|f| (a.fmin..=a.fmax).contains(f))
        .collect();
    let mut proc: Box<dyn ArrayProcessor> = if a.analytic {
        Box::new(AnalyticCardioid(reference))
    } else if a.dma {
        Box::new(DmaProcessor::look_30(geometry.clone()))
    } else {
        Box::new(processor(a.checkpoint.as_deref().expect("checked above"), 0.5774)?)
    };
    let table = measure_pattern(proc.as_mut(), &geometry, &azimuth_grid(a.grid), &freqs, &settings)?;
    let rows = pattern_rows(&table, &reference);
    if let Some(dir) = a.csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_pattern_csv(&rows, BufWriter::new(File::create(&a.csv)?))?;
    let dir = a.csv.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    record::write(dir, "pattern", a.common.seed, &kv, json!({ "rows": rows.len() }))
}

pub fn stereo(a: StereoArgs) -> CliResult {
    let kv = a.common.load()?;
    let cfg = configure(&kv, |kv| {
        let mut cfg = MovingSceneConfig {
            noise_seed: derive_seed(a.common.seed, "stereo-noise", 0),
            ..Default::default()
        };
        cfg.apply(kv)?;
        Ok(cfg)
    })?;
    if !(0.0..=1.0).contains(&a.beta) {
        return Err(usage(format!("beta {} outside [0, 1]", a.beta)));
    }
    let out = out_dir(&a.out)?;
    let model = match (a.mode, &a.checkpoint) {
        (Mode::Model, Some(p)) => Some(processor(p, a.beta)?),
        (Mode::Model, None) => return Err(usage("model mode needs --checkpoint")),
        _ => None,
    };
    let fs = cfg.sim.sample_rate;
    let n = (cfg.trajectory.duration_s * fs as f64).round() as usize;
    let speech = match &a.speech {
        Some(p) => {
            let w = read_wav(p)?;
            if w.num_channels() != 1 || w.sample_rate() != fs {
                return Err(format!("{}: need mono {fs} Hz", p.display()).into());
            }
            w.channel(0).to_vec()
        }
        None => synthetic_speech(derive_seed(a.common.seed, "stereo-speech", 0), n, fs),
    };
    let scene = render_moving_scene(&cfg, &speech)?;
    let mode = match a.mode {
        Mode::Oracle => StereoMode::Oracle { stft: StftConfig::default() },
        Mode::IdealVdm => StereoMode::IdealVdm,
        Mode::Model => StereoMode::Model(model.as_ref().expect("loaded above")),
    };
    let y = stereo_render(&mode, &scene, a.beta)?;
    write_wav(out.join("stereo.wav"), &y, BitDepth::Float32)?;
    let curve = ild_curve(y.channel(0), y.channel(1), fs)?;
    write_ild_csv(&curve, BufWriter::new(File::create(out.join("ild.csv"))?))?;
    let zero = ild_trend_zero(&curve);
    let passage = cfg.trajectory.passage_time(90.0);
    println!("mean |ILD| {:.2} dB, zero crossing {:?} s, 90 degree passage {:?} s", mean_abs_ild(&curve), zero, passage);
    record::write(
        out,
        "stereo",
        a.common.seed,
        &kv,
        json!({ "mean_abs_ild_db": mean_abs_ild(&curve), "ild_zero_s": zero, "passage_s": passage }),
    )
}
