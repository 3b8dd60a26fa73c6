//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdm_core::acoustics::{
    azimuth_grid, estimate_rt60, measure_pattern, render_source_rirs, AnalyticCardioid, ArrayGeometry, CardioidPattern,
    ProbeSettings, RoomSpec, SimSettings, Vec3, SPEED_OF_SOUND,
};
use vdm_core::baselines::{bin_frequencies, DmaProcessor};
use vdm_core::dataset::{
    build_sample, derive_seed, gen_dataset, read_manifest, sample_scene, DatasetOptions, Sample, SceneRanges,
    SpeechSource, Split, StoredSample, TargetConfig, MANIFEST_FILE,
};
use vdm_core::metrics::{cvdr, scatter_report, sdr, ScatterSample};
use vdm_core::ndf::{batch_objective, train, LossSettings, NetConfig, NetworkParams, TrainConfig, TrainItem};
use vdm_core::signal::{energy, Spectrogram, Stft, StftConfig};
use vdm_core::stereo::{
    ild_curve, ild_trend_zero, mean_abs_ild, mean_abs_ild_difference, render_moving_scene, stereo_parts,
    stereo_render, MovingSceneConfig, StereoMode,
};
use vdm_core::targets::{beta_from_di, coh_window, inv_window, oracle_masks, WindowSpec};
use vdm_core::dataset::synthetic_speech;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn c1_beta() -> Outcome {
    let a = beta_from_di(4.77).value;
    let b = beta_from_di(11.14).value;
    outcome(
        (a - 0.577).abs() <= 0.001 && (b - 0.277).abs() <= 0.001,
        format!("beta(4.77) = {a:.4}, beta(11.14) = {b:.4}"),
    )
}

fn c2_windows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fade = 960;
    let mut exact = true;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let delta = rng.gen_range(0..4000);
        let len = delta + fade + rng.gen_range(0..4000);
        let w = coh_window::<f64>(&WindowSpec::new(delta, fade, len).unwrap()).unwrap();
        let inv = inv_window(&w);
        exact &= w.iter().zip(&inv).all(|(a, b)| a + b == 1.0);
        for (k, v) in w.iter().enumerate() {
            let expect = if k < delta {
                1.0
            } else if k < delta + fade {
                0.5 + 0.5 * (std::f64::consts::PI * (k - delta) as f64 / fade as f64).cos()
            } else {
                0.0
            };
            worst = worst.max((v - expect).abs());
        }
    }
    outcome(exact && worst < 1e-15, format!("sum exact: {exact}, max deviation from piecewise form {worst:.1e}"))
}

fn c3_stft() -> Outcome {
    let st = Stft::<f64>::new(StftConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut rt, mut adj): (f64, f64) = (0.0, 0.0);
    for i in 0..1000 {
        let n = rng.gen_range(1024..8000);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fx = st.forward(&x).unwrap();
        let y = st.inverse(&fx).unwrap();
        for (a, b) in x.iter().zip(&y) {
            rt = rt.max((a - b).abs());
        }
        if i % 10 == 0 {
            let g: Vec<Complex<f64>> = (0..fx.data().len())
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let g = Spectrogram::from_data(fx.config(), n, g).unwrap();
            let lhs: f64 = fx.data().iter().zip(g.data()).map(|(a, b)| (a * b.conj()).re).sum();
            let rhs: f64 = x.iter().zip(st.forward_adjoint(&g).unwrap()).map(|(a, b)| a * b).sum();
            adj = adj.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
        }
    }
    outcome(rt < 1e-9 && adj < 1e-10, format!("round trip {rt:.1e}, adjoint pairing {adj:.1e} (relative)"))
}

fn c4_gradients() -> Outcome {
    let stft = Stft::<f64>::new(StftConfig::new(16, 8).unwrap()).unwrap();
    let item = |seed: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut sig = || -> Vec<f64> { (0..40).map(|_| r.gen_range(-1.0..1.0)).collect() };
        TrainItem {
            mics: vec![stft.forward(&sig()).unwrap(), stft.forward(&sig()).unwrap()],
            z_coh: sig(),
            z_diff: sig(),
            z_vdm: sig(),
            beta: 0.577,
        }
    };
    let p = NetworkParams::<f64>::init(NetConfig { channels: 2, bins: 9, hidden_freq: 8, hidden_time: 8, seed: 4 }).unwrap();
    let items = [item(40), item(41)];
    let batch: Vec<&TrainItem<f64>> = items.iter().collect();
    let shape = (batch[0].mics[0].frames(), batch[0].mics[0].bins());
    let mut worst = [0.0f64; 2];
    for (slot, lambda) in [0.0, 1.0].into_iter().enumerate() {
        let s = LossSettings { lambda_vdm: lambda, spectral: false };
        let mut g = p.zeros_like();
        batch_objective(&p, &batch, s, Some(&mut g)).unwrap();
        let sizes: Vec<usize> = p.tensors().iter().map(|t| t.data.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(44 + slot as u64);
        let mut q = p.clone();
        let h = 1e-5;
        for _ in 0..200 {
            let ti = rng.gen_range(0..sizes.len());
            let k = rng.gen_range(0..sizes[ti]);
            let v = q.tensors()[ti].data[k];
            q.tensors_mut()[ti].data[k] = v + h;
            let up = batch_objective(&q, &batch, s, None).unwrap().total;
            q.tensors_mut()[ti].data[k] = v - h;
            let down = batch_objective(&q, &batch, s, None).unwrap().total;
            q.tensors_mut()[ti].data[k] = v;
            let num = (up - down) / (2.0 * h);
            let ana = g.tensors()[ti].data[k];
            worst[slot] = worst[slot].max((num - ana).abs() / num.abs().max(ana.abs()).max(1e-6));
        }
    }
    outcome(
        shape == (6, 9) && worst[0] < 1e-4 && worst[1] < 1e-4,
        format!("T x F = {shape:?}, max relative error {:.1e} (lambda 0), {:.1e} (lambda 1)", worst[0], worst[1]),
    )
}

fn c5_overfit() -> Outcome {
    let ranges = SceneRanges::default();
    let seed = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = sample_scene(&mut rng, Split::Train, &ranges, seed).unwrap();
    scene.sources.truncate(1);
    let s = build_sample(&scene, 0, &SpeechSource::Synthetic, &TargetConfig::default(), &SimSettings::default(), 0.5).unwrap();
    let item = stored(&s).to_train_item::<f32>(StftConfig::default(), s.bundle.beta).unwrap();
    let mut p = NetworkParams::<f32>::init(NetConfig { channels: 4, bins: 257, hidden_freq: 32, hidden_time: 32, seed: 1 }).unwrap();
    let cfg = TrainConfig { lr: 5e-3, epochs: 500, batch_size: 1, ..Default::default() };
    let trace = train(&mut p, &[item], &cfg, |_| {}).unwrap();
    let first = trace[0].terms.total;
    let last = trace.last().unwrap().terms.total;
    let drop = 1.0 - last / first;
    let means: Vec<f64> = trace.chunks(50).map(|c| c.iter().map(|r| r.terms.total).sum::<f64>() / c.len() as f64).collect();
    let step_median = median(means.windows(2).map(|w| w[1] - w[0]).collect());
    outcome(
        trace.len() <= 500 && drop >= 0.8 && step_median <= 0.0,
        format!(
            "{} steps, L_final {first:.3} -> {last:.3} ({:.1}% drop), median change of 50-step means {step_median:+.4}",
            trace.len(),
            100.0 * drop
        ),
    )
}

fn stored(s: &Sample) -> StoredSample {
    StoredSample {
        mics: s.bundle.mics.clone(),
        z_coh: s.bundle.z_coh.clone(),
        z_diff: s.bundle.z_diff.clone(),
        z_vdm: s.bundle.z_vdm.clone(),
    }
}

fn test_scenes(n: u64, master: u64, split: Split) -> Vec<Sample> {
    let ranges = SceneRanges::default();
    (0..n)
        .map(|i| {
            let seed = derive_seed(master, split.name(), i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scene = sample_scene(&mut rng, split, &ranges, seed).unwrap();
            build_sample(&scene, i as usize, &SpeechSource::Synthetic, &TargetConfig::default(), &SimSettings::default(), ranges.duration_s)
                .unwrap()
        })
        .collect()
}

struct OracleRun {
    full: Vec<f64>,
    unclipped: Vec<f64>,
    scatter: Vec<(Spectrogram<f64>, Spectrogram<f64>, Vec<f64>, Vec<f64>, f64)>,
}

fn oracle_run(samples: &[Sample]) -> OracleRun {
    let st = Stft::<f64>::new(StftConfig::default()).unwrap();
    let mut run = OracleRun { full: vec![], unclipped: vec![], scatter: vec![] };
    for s in samples {
        let b = &s.bundle;
        let y1 = st.forward(b.mics.channel(0)).unwrap();
        let zc = st.forward(&b.z_coh).unwrap();
        let zd = st.forward(&b.z_diff).unwrap();
        let m = oracle_masks(&y1, &zc, &zd).unwrap();
        let ec = m.coh.hadamard(&y1).unwrap();
        let ed = m.diff.hadamard(&y1).unwrap();
        let c = st.inverse(&ec).unwrap();
        let d = st.inverse(&ed).unwrap();
        let est: Vec<f64> = c.iter().zip(&d).map(|(a, x)| a + b.beta * x).collect();
        let target = b.recombined();
        run.full.push(sdr(&est, &target).unwrap());
        let on_box = |v: &Complex<f64>| v.re.abs() >= 1.0 || v.im.abs() >= 1.0;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..y1.data().len() {
            if on_box(&m.coh.data()[i]) || on_box(&m.diff.data()[i]) {
                continue;
            }
            let z = zc.data()[i] + zd.data()[i] * b.beta;
            let e = ec.data()[i] + ed.data()[i] * b.beta;
            num += z.norm_sqr();
            den += (z - e).norm_sqr();
        }
        run.unclipped.push(10.0 * (num / den).log10().min(10.0));
        run.scatter.push((zc, zd, est, target, s.record.rt60));
    }
    run
}

fn c6_oracle(run: &OracleRun) -> Outcome {
    let med = median(run.full.clone());
    let min = run.full.iter().cloned().fold(f64::INFINITY, f64::min);
    let below = run.full.iter().filter(|v| **v < 25.0).count();
    let min_unclipped = run.unclipped.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        med >= 25.0 && min_unclipped >= 25.0,
        format!(
            "{} scenes: full-band SDR median {med:.1} dB (min {min:.1}, {below} below 25), unclipped-bin SDR min {min_unclipped:.1} dB",
            run.full.len()
        ),
    )
}

fn c7_eq4() -> Outcome {
    let samples = test_scenes(50, 77, Split::Train);
    let ratios: Vec<f64> = samples
        .iter()
        .map(|s| {
            let b = &s.bundle;
            let resid: Vec<f64> = b.z_vdm.iter().zip(&b.z_coh).map(|(v, c)| v - c).collect();
            10.0 * (energy(&resid) / (b.beta * b.beta * energy(&b.z_diff))).log10()
        })
        .collect();
    let med = median(ratios);
    outcome(med.abs() <= 3.0, format!("median over 50 J=1 scenes {med:+.2} dB"))
}

fn c8_directivity() -> Outcome {
    let g = ArrayGeometry::compact_uca();
    let settings = ProbeSettings { duration_secs: 2.0, ..Default::default() };
    let freqs: Vec<f64> = bin_frequencies(settings.stft, settings.sample_rate)
        .into_iter()
        .filter(|f| (200.0..=4000.0).contains(f))
        .collect();
    let pattern = CardioidPattern::new(1, 30f64.to_radians());
    let grid = azimuth_grid(5.0);
    let t = measure_pattern(&mut AnalyticCardioid(pattern), &g, &grid, &freqs, &settings).unwrap();
    let mut worst: f64 = 0.0;
    for (az, row) in grid.iter().zip(&t.gains_db) {
        let raw: f64 = 0.5 + 0.5 * (az - 30f64.to_radians()).cos();
        let expect = 20.0 * raw.max(10f64.powf(-1.5)).log10();
        if expect > -30.0 + 1e-9 {
            for v in row {
                worst = worst.max((v - expect).abs());
            }
        }
    }
    let dma_grid = [30f64.to_radians(), 210f64.to_radians()];
    let d = measure_pattern(&mut DmaProcessor::look_30(g.clone()), &g, &dma_grid, &freqs, &settings).unwrap();
    let target_dev = d.gains_db[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let null_depth = d.gains_db[1].iter().map(|v| -v).fold(f64::INFINITY, f64::min);
    outcome(
        worst < 0.1 && null_depth >= 25.0 && target_dev <= 0.5,
        format!(
            "analytic max error {worst:.3} dB; DMA null depth >= {null_depth:.1} dB, target within {target_dev:.3} dB ({}-{} Hz)",
            freqs[0],
            freqs[freqs.len() - 1]
        ),
    )
}

fn c9_rir() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let single = ArrayGeometry::new(vec![Vec3::default()], 0);
    let mut worst_tap = 0i64;
    for _ in 0..100 {
        let room = RoomSpec::new(rng.gen_range(4.0..10.0), rng.gen_range(3.0..8.0), rng.gen_range(2.5..5.0), 0.3).unwrap();
        let d = room.dims();
        let mut pt = || Vec3::new(rng.gen_range(0.3..d[0] - 0.3), rng.gen_range(0.3..d[1] - 0.3), rng.gen_range(0.3..d[2] - 0.3));
        let (src, rcv) = (pt(), pt());
        let sim = SimSettings { max_order: Some(0), rir_len: Some(2400), ..Default::default() };
        let r = render_source_rirs(&room, &single, rcv, src, &[], &sim).unwrap();
        let expect = (16_000.0 * src.distance(rcv) / SPEED_OF_SOUND).round() as i64;
        let peak = r.mics[0]
            .taps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0 as i64;
        worst_tap = worst_tap.max((peak - expect).abs()).max((r.mics[0].direct_path_index as i64 - expect).abs());
    }
    let ranges = SceneRanges::default();
    let mut medians = Vec::new();
    for rt in [0.2, 0.4, 0.6] {
        let r = SceneRanges { test_rt60: vec![rt], ..ranges.clone() };
        let ratios: Vec<f64> = (0..5)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(900 + i);
                let scene = sample_scene(&mut rng, Split::Test, &r, i).unwrap();
                let rirs = render_source_rirs(&scene.room, &single, scene.center, scene.sources[0].position, &[], &SimSettings::default())
                    .unwrap();
                estimate_rt60(&rirs.mics[0].taps, 16_000, -5.0, -25.0).unwrap() / rt
            })
            .collect();
        medians.push(median(ratios));
    }
    let rt_ok = medians.iter().all(|m| (m - 1.0).abs() <= 0.2);
    outcome(
        worst_tap <= 1 && rt_ok,
        format!(
            "direct path worst offset {worst_tap} tap(s) over 100 geometries; median T20/rt60 {:.3}, {:.3}, {:.3} for 0.2/0.4/0.6 s",
            medians[0], medians[1], medians[2]
        ),
    )
}

fn c10_dataset() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let opts = |dir: &std::path::Path, jobs| DatasetOptions {
        n: 50,
        split: Split::Train,
        seed: 10,
        out_dir: dir.to_path_buf(),
        ranges: SceneRanges::default(),
        target: TargetConfig::default(),
        sim: SimSettings::default(),
        speech: SpeechSource::Synthetic,
        jobs,
    };
    gen_dataset(&opts(a.path(), 0)).unwrap();
    gen_dataset(&opts(b.path(), 1)).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let identical = names.len() == 101
        && names.iter().all(|n| std::fs::read(a.path().join(n)).unwrap() == std::fs::read(b.path().join(n)).unwrap());
    let r = SceneRanges::default();
    let grid = Split::Train.angle_grid();
    let recs = read_manifest(a.path().join(MANIFEST_FILE)).unwrap();
    let mut violations = 0;
    for rec in &recs {
        let room = rec.room;
        let ok = r.length.contains(room.length)
            && r.width.contains(room.width)
            && r.height.contains(room.height)
            && r.rt60.contains(rec.rt60)
            && room.wall_clearance(rec.center) >= r.wall_margin
            && (1..=r.max_sources).contains(&rec.sources.len())
            && rec.sources.iter().all(|s| {
                r.distance.contains(s.distance)
                    && grid.iter().any(|g| (g - s.azimuth_deg).abs() < 1e-9)
                    && room.contains(s.position, 0.0)
            });
        violations += usize::from(!ok);
    }
    let grids = Split::ALL.map(|s| s.angle_grid());
    let mut disjoint = true;
    for i in 0..3 {
        for j in i + 1..3 {
            disjoint &= grids[i].iter().all(|a| grids[j].iter().all(|b| (a - b).abs() > 1e-9));
        }
    }
    outcome(
        identical && violations == 0 && recs.len() == 50 && disjoint,
        format!("byte-identical rerun: {identical}; {violations} of {} records out of range; grids disjoint: {disjoint}", recs.len()),
    )
}

fn c11_stereo() -> Outcome {
    let cfg = MovingSceneConfig { noise_seed: 11, ..Default::default() };
    let n = (cfg.trajectory.duration_s * 16_000.0) as usize;
    let scene = render_moving_scene(&cfg, &synthetic_speech(11, n, 16_000)).unwrap();
    let beta = 0.577;
    let oracle = StereoMode::Oracle { stft: StftConfig::default() };
    let ideal = stereo_render(&StereoMode::IdealVdm, &scene, beta).unwrap();
    let parts = stereo_parts(&oracle, &scene).unwrap();
    let est = stereo_render(&oracle, &scene, beta).unwrap();
    let ci = ild_curve(ideal.channel(0), ideal.channel(1), 16_000).unwrap();
    let co = ild_curve(est.channel(0), est.channel(1), 16_000).unwrap();
    let diff = mean_abs_ild_difference(&co, &ci).unwrap();
    let passage = cfg.trajectory.passage_time(90.0).unwrap();
    let zero = ild_trend_zero(&co).unwrap_or(f64::NAN);

    let y0 = parts.combine(0.0);
    let y1 = parts.combine(1.0);
    let mut affine: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for b in [0.0, 0.3, beta, 1.0] {
        let yb = parts.combine(b);
        for k in 0..2 {
            for i in 0..n {
                affine = affine.max((yb[k][i] - (y0[k][i] + b * (y1[k][i] - y0[k][i]))).abs());
                peak = peak.max(yb[k][i].abs());
            }
        }
    }
    let same = est.channel(0) == parts.combine(beta)[0].as_slice();
    let ilds: Vec<f64> = [0.0, 0.3, beta, 1.0]
        .iter()
        .map(|&b| {
            let y = parts.combine(b);
            mean_abs_ild(&ild_curve(&y[0], &y[1], 16_000).unwrap())
        })
        .collect();
    let monotone = ilds.windows(2).all(|w| w[1] < w[0]);
    let worst_boundary = scene.boundary_discontinuity_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        diff <= 1.0 && (zero - passage).abs() <= 1.0 && affine <= 1e-12 * peak && same,
        format!(
            "mean |ILD diff| {diff:.2} dB; zero crossing {zero:.2} s vs passage {passage:.2} s; affine residual {:.1e}; \
             mean |ILD| at beta 0/0.3/0.577/1: {:.2}/{:.2}/{:.2}/{:.2} dB (decreasing: {monotone}); worst boundary {worst_boundary:.1} dB",
            affine / peak,
            ilds[0],
            ilds[1],
            ilds[2],
            ilds[3]
        ),
    )
}

fn c12_scatter(run: &OracleRun) -> Outcome {
    let samples: Vec<ScatterSample<'_>> = run
        .scatter
        .iter()
        .map(|(zc, zd, est, target, rt60)| ScatterSample { z_coh: zc, z_diff: zd, estimate: est, reference: target, rt60: *rt60 })
        .collect();
    let mut csv = Vec::new();
    let points = scatter_report(&samples, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    let mut exact = rows.len() == samples.len() && text.starts_with("cvdr_dB,sdr_dB,rt60\n");
    for ((s, p), row) in samples.iter().zip(&points).zip(&rows) {
        let c = cvdr(s.z_coh, s.z_diff).unwrap().db;
        let d = sdr(s.estimate, s.reference).unwrap();
        exact &= p.cvdr_db == c && p.sdr_db == d && row[0] == c && row[1] == d && row[2] == s.rt60;
    }
    let mut by_rt: Vec<(f64, Vec<f64>)> = Vec::new();
    for p in &points {
        match by_rt.iter_mut().find(|(r, _)| *r == p.rt60) {
            Some((_, v)) => v.push(p.cvdr_db),
            None => by_rt.push((p.rt60, vec![p.cvdr_db])),
        }
    }
    by_rt.sort_by(|a, b| a.0.total_cmp(&b.0));
    let medians: Vec<String> = by_rt.iter().map(|(r, v)| format!("{r}: {:.1} dB (n={})", median(v.clone()), v.len())).collect();
    let lo = median(by_rt.first().unwrap().1.clone());
    let hi = median(by_rt.last().unwrap().1.clone());
    let direction = if hi > lo { "toward larger values" } else { "toward smaller values" };
    outcome(
        exact,
        format!("{} rows recomputed exactly: {exact}; median CVDR by rt60 {}; shift with rt60 {direction} (reported)", rows.len(), medians.join(", ")),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let el = t.elapsed();
        let pass = o.pass && el <= budget;
        failed += usize::from(!pass);
        println!(
            "[{}] {id:>2} {name}: {} [{:.1} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            el.as_secs_f64(),
            budget.as_secs()
        );
    };
    let mins = |m: u64| Duration::from_secs(60 * m);
    report(1, "beta constants", Duration::from_secs(1), &mut c1_beta);
    report(2, "window complementarity", Duration::from_secs(1), &mut c2_windows);
    report(3, "stft round trip and adjoint", Duration::from_secs(30), &mut c3_stft);
    report(4, "gradient check", mins(2), &mut c4_gradients);
    report(5, "overfit smoke test", mins(10), &mut c5_overfit);
    let mut run = None;
    report(6, "oracle end-to-end", mins(2), &mut || {
        let r = oracle_run(&test_scenes(20, 66, Split::Test));
        let o = c6_oracle(&r);
        run = Some(r);
        o
    });
    report(7, "diffuse approximation", mins(5), &mut c7_eq4);
    report(8, "directivity fidelity", mins(5), &mut c8_directivity);
    report(9, "rir physics", mins(5), &mut c9_rir);
    report(10, "dataset determinism and ranges", mins(5), &mut c10_dataset);
    report(11, "stereo application", mins(10), &mut c11_stereo);
    let run = run.expect("criterion 6 ran");
    report(12, "scatter plumbing", mins(5), &mut || c12_scatter(&run));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
