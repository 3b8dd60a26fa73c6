use std::sync::OnceLock;

use num_complex::Complex;
use proptest::prelude::*;
use vdm_core::acoustics::{
    cardioid_gain, render_source_rirs, schroeder_curve_db, ArrayGeometry, CardioidPattern, Directivity, RoomSpec,
    SimSettings, Vec3,
};
use vdm_core::metrics::{cvdr, sdr, segmental_level_diff};
use vdm_core::ndf::{infer_masks, read_checkpoint, write_checkpoint, Features, NetConfig, NetworkParams};
use vdm_core::signal::{Spectrogram, Stft, StftConfig, Waveform};
use vdm_core::stereo::{steer_by_swap, StereoParts};
use vdm_core::targets::{coh_window, inv_window, render_targets, TargetRirs, WindowSpec};

fn signal(len: impl Strategy<Value = usize>) -> impl Strategy<Value = Vec<f64>> {
    len.prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n))
}

fn stft512() -> &'static Stft<f64> {
    static S: OnceLock<Stft<f64>> = OnceLock::new();
    S.get_or_init(|| Stft::new(StftConfig::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stft_round_trip(x in signal(1024usize..6000)) {
        let s = stft512();
        let y = s.inverse(&s.forward(&x).unwrap()).unwrap();
        prop_assert_eq!(y.len(), x.len());
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn stft_adjoint_pairing(x in signal(1024usize..3000), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let s = stft512();
        let fx = s.forward(&x).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..fx.data().len())
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let g = Spectrogram::from_data(fx.config(), x.len(), data).unwrap();
        let lhs: f64 = fx.data().iter().zip(g.data()).map(|(a, b)| (a * b.conj()).re).sum();
        let rhs: f64 = x.iter().zip(s.forward_adjoint(&g).unwrap()).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn schroeder_curve_never_rises(taps in signal(1usize..2000)) {
        let c = schroeder_curve_db(&taps);
        prop_assert!(c.windows(2).all(|w| w[1] <= w[0] || !w[1].is_finite()));
    }

    #[test]
    fn window_pair_sums_to_one(delta in 0usize..2000, fade in 1usize..1200, extra in 0usize..500) {
        let spec = WindowSpec::new(delta, fade, delta + fade + extra).unwrap();
        let w = coh_window::<f64>(&spec).unwrap();
        let inv = inv_window(&w);
        prop_assert!(w.iter().zip(&inv).all(|(a, b)| a + b == 1.0));
        prop_assert!(w.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn cardioid_gain_is_bounded(order in 1u32..8, look in 0.0f64..6.3, az in -7.0f64..7.0, polar in 0.0f64..3.15) {
        let p = CardioidPattern::new(order, look);
        let g = cardioid_gain(&p, az, polar);
        prop_assert!(g >= p.floor && g <= 1.0 + 1e-15);
        prop_assert!((cardioid_gain(&p, az + 2.0 * std::f64::consts::PI, polar) - g).abs() < 1e-12);
    }

    #[test]
    fn sdr_scales_jointly(x in signal(64usize..256), noise in signal(256usize..257), a in 0.01f64..100.0) {
        let est: Vec<f64> = x.iter().zip(&noise).map(|(v, n)| v + 0.1 * n).collect();
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let base = sdr(&est, &x).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * a).collect();
        let es: Vec<f64> = est.iter().map(|v| v * a).collect();
        prop_assert!((sdr(&es, &xs).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn cvdr_ignores_common_gain(x in signal(1024usize..2048), y in signal(2048usize..2049), a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
        let s = stft512();
        let zc = s.forward(&x).unwrap();
        let zd = s.forward(&y[..x.len()]).unwrap();
        let scale = |z: &Spectrogram<f64>| {
            let d = z.data().iter().map(|c| c * a).collect();
            Spectrogram::from_data(z.config(), z.signal_len(), d).unwrap()
        };
        let r0 = cvdr(&zc, &zd).unwrap();
        let r1 = cvdr(&scale(&zc), &scale(&zd)).unwrap();
        prop_assert!((r0.db - r1.db).abs() < 1e-9);
    }

    #[test]
    fn level_difference_is_antisymmetric(l in signal(500usize..2000), r in signal(2000usize..2001), seg in 1usize..400, hop in 1usize..200) {
        let r = &r[..l.len()];
        let a = segmental_level_diff(&l, r, seg, hop).unwrap();
        let b = segmental_level_diff(r, &l, seg, hop).unwrap();
        prop_assert_eq!(a.len(), b.len());
        prop_assert!(a.iter().zip(&b).all(|(p, q)| *p == -*q));
    }

    #[test]
    fn stereo_parts_are_affine_in_beta(c in signal(1usize..64), d in signal(64usize..65), beta in 0.0f64..1.0) {
        let n = c.len();
        let parts = StereoParts { coh: [c.clone(), c.iter().map(|v| -v).collect()], diff: [d[..n].to_vec(), d[..n].to_vec()] };
        let y0 = parts.combine(0.0);
        let y1 = parts.combine(1.0);
        let yb = parts.combine(beta);
        for k in 0..2 {
            for i in 0..n {
                prop_assert!((yb[k][i] - (y0[k][i] + beta * (y1[k][i] - y0[k][i]))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_swap_is_an_involution(x in signal(4usize..400)) {
        let w = Waveform::new(x.chunks(x.len() / 4).take(4).map(|c| c[..x.len() / 4].to_vec()).collect(), 16_000).unwrap();
        let once = steer_by_swap(&w, 150.0).unwrap();
        prop_assert_eq!(once.channel(0), w.channel(0));
        prop_assert_eq!(once.channel(3), w.channel(3));
        prop_assert_eq!(steer_by_swap(&once, 150.0).unwrap(), w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn masks_stay_inside_the_unit_box(seed in any::<u64>(), frames in 2usize..6, scale in 0.01f64..100.0) {
        use rand::{Rng, SeedableRng};
        let cfg = NetConfig { channels: 2, bins: 9, hidden_freq: 4, hidden_time: 4, seed };
        let p = NetworkParams::<f64>::init(cfg).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 1);
        let st = StftConfig::new(16, 8).unwrap();
        let len = 8 * frames;
        let specs: Vec<Spectrogram<f64>> = (0..2)
            .map(|_| {
                let x: Vec<f64> = (0..len).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
                Stft::new(st).unwrap().forward(&x).unwrap()
            })
            .collect();
        let m = infer_masks(&p, &Features::from_spectrograms(&specs).unwrap()).unwrap();
        prop_assert_eq!(m.coh.len(), specs[0].data().len());
        for v in m.coh.iter().chain(&m.diff) {
            prop_assert!(v.re.abs() < 1.0 && v.im.abs() < 1.0);
        }
    }

    #[test]
    fn checkpoint_round_trip_is_exact(seed in any::<u64>(), hf in 1usize..6, ht in 1usize..6) {
        let cfg = NetConfig { channels: 4, bins: 257, hidden_freq: hf, hidden_time: ht, seed };
        let p = NetworkParams::<f32>::init(cfg).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&p, &mut bytes).unwrap();
        let q = read_checkpoint(bytes.as_slice(), 257).unwrap();
        prop_assert_eq!(q.tensors(), p.tensors());
        let mut again = Vec::new();
        write_checkpoint(&q, &mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }
}

fn small_room_rirs(source: Vec3) -> TargetRirs {
    let room = RoomSpec::new(5.0, 4.0, 3.0, 0.2).unwrap();
    let center = Vec3::new(2.5, 2.0, 1.5);
    let sim = SimSettings { rir_len: Some(1500), ..Default::default() };
    let look = Directivity::Cardioid(CardioidPattern::new(1, 30f64.to_radians()));
    let rirs = render_source_rirs(&room, &ArrayGeometry::compact_uca(), center, source, &[look], &sim).unwrap();
    TargetRirs::from_source(rirs, 0, 0, 480).unwrap()
}

fn rirs_pair() -> &'static [TargetRirs; 2] {
    static R: OnceLock<[TargetRirs; 2]> = OnceLock::new();
    R.get_or_init(|| [small_room_rirs(Vec3::new(3.5, 2.8, 1.5)), small_room_rirs(Vec3::new(1.2, 1.4, 1.5))])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn targets_are_linear_in_sources(a in signal(800usize..801), b in signal(800usize..801)) {
        let r = rirs_pair();
        let both = render_targets(&[a.clone(), b.clone()], &r[..], 0, 0.5, None, 16_000).unwrap();
        let ra = render_targets(&[a.clone()], &r[..1], 0, 0.5, None, 16_000).unwrap();
        let rb = render_targets(&[b.clone()], &r[1..], 0, 0.5, None, 16_000).unwrap();
        let close = |x: &[f64], y: &[f64], z: &[f64]| x.iter().zip(y).zip(z).all(|((p, q), s)| (p - q - s).abs() < 1e-10);
        prop_assert!(close(&both.z_coh, &ra.z_coh, &rb.z_coh));
        prop_assert!(close(&both.z_diff, &ra.z_diff, &rb.z_diff));
        prop_assert!(close(&both.z_vdm, &ra.z_vdm, &rb.z_vdm));
        for q in 0..4 {
            prop_assert!(close(both.mics.channel(q), ra.mics.channel(q), rb.mics.channel(q)));
        }
    }

    #[test]
    fn doubling_sources_doubles_targets(a in signal(600usize..601)) {
        let r = rirs_pair();
        let one = render_targets(&[a.clone()], &r[..1], 0, 0.5, None, 16_000).unwrap();
        let twice: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let two = render_targets(&[twice], &r[..1], 0, 0.5, None, 16_000).unwrap();
        for (x, y) in [(&one.z_coh, &two.z_coh), (&one.z_diff, &two.z_diff), (&one.z_vdm, &two.z_vdm)] {
            prop_assert!(x.iter().zip(y).all(|(p, q)| 2.0 * p == *q));
        }
    }
}
