use demonlab_core::analytics::{closed_form_power, Normalization, PowerModel};
use demonlab_core::fock::{beamsplitter_split, joint_detection_pmf, loss_channel};
use demonlab_core::information::mutual_information;
use demonlab_core::protocol::{detector_probs, propagate, Policy, SwitchState};
use demonlab_core::sources::{IN_A, IN_B};
use demonlab_core::{
    ClickPattern, Distribution, Efficiency, MeanPhotonNumber, Reflection, Source,
};
use proptest::prelude::*;

fn two_mode(cutoff: u32) -> impl Strategy<Value = Distribution> {
    let tuples: Vec<Vec<u32>> = (0..=cutoff)
        .flat_map(|a| (0..=cutoff - a).map(move |b| vec![a, b]))
        .collect();
    let n = tuples.len();
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("nonzero weights", move |w| {
        if w.iter().sum::<f64>() <= 1e-9 {
            return None;
        }
        Distribution::from_weights(&[IN_A, IN_B], cutoff, tuples.clone().into_iter().zip(w)).ok()
    })
}

fn total(d: &Distribution) -> f64 {
    d.total_mass() + d.lost_mass()
}

fn policy() -> impl Strategy<Value = Policy> {
    prop::array::uniform4(any::<bool>()).prop_map(|rows| {
        let mut p = Policy::constant(SwitchState::Bar);
        for (pattern, cross) in ClickPattern::ALL.into_iter().zip(rows) {
            if cross {
                p.set(pattern, SwitchState::Cross);
            }
        }
        p
    })
}

proptest! {
    #[test]
    fn channels_preserve_normalization(d in two_mode(4), r2 in 0.0f64..=1.0, e in 0.0f64..=1.0) {
        let r = Reflection::from_reflectivity(r2).unwrap();
        let split = beamsplitter_split(&d, IN_A, r, "x").unwrap();
        prop_assert!((total(&split) - 1.0).abs() < 1e-12);
        let lossy = loss_channel(&split, "x", Efficiency::new(e).unwrap()).unwrap();
        prop_assert!((total(&lossy) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_then_split_is_split_then_loss_on_both_ports(
        d in two_mode(4), r2 in 0.0f64..=1.0, e in 0.0f64..=1.0,
    ) {
        let r = Reflection::from_reflectivity(r2).unwrap();
        let eps = Efficiency::new(e).unwrap();
        let first = beamsplitter_split(&loss_channel(&d, IN_A, eps).unwrap(), IN_A, r, "x").unwrap();
        let split = beamsplitter_split(&d, IN_A, r, "x").unwrap();
        let second = loss_channel(&loss_channel(&split, IN_A, eps).unwrap(), "x", eps).unwrap();
        prop_assert!(first.max_abs_difference(&second).unwrap() < 1e-12);
    }

    #[test]
    fn losses_on_different_modes_commute(d in two_mode(4), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (ea, eb) = (Efficiency::new(a).unwrap(), Efficiency::new(b).unwrap());
        let x = loss_channel(&loss_channel(&d, IN_A, ea).unwrap(), IN_B, eb).unwrap();
        let y = loss_channel(&loss_channel(&d, IN_B, eb).unwrap(), IN_A, ea).unwrap();
        prop_assert!(x.max_abs_difference(&y).unwrap() < 1e-12);
    }

    #[test]
    fn joint_detection_is_split_thermal(nbar in 0.0f64..0.2, r2 in 0.0f64..=1.0) {
        let n = MeanPhotonNumber::new(nbar).unwrap();
        let r = Reflection::from_reflectivity(r2).unwrap();
        let split = beamsplitter_split(&Distribution::thermal("a", n, 4), "a", r, "b").unwrap();
        for m in 0..=4u32 {
            for k in 0..=4 - m {
                let direct = joint_detection_pmf(n, r, m, k);
                prop_assert!((split.probability(&[m, k]) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_photon_number_bookkeeping(d in two_mode(4), r2 in 0.0f64..=1.0, e in 0.0f64..=1.0) {
        let before = d.mean_occupation(IN_A).unwrap();
        let split = beamsplitter_split(&d, IN_A, Reflection::from_reflectivity(r2).unwrap(), "x").unwrap();
        let after = split.mean_occupation(IN_A).unwrap() + split.mean_occupation("x").unwrap();
        prop_assert!((before - after).abs() < 1e-12);
        let lossy = loss_channel(&d, IN_A, Efficiency::new(e).unwrap()).unwrap();
        prop_assert!((lossy.mean_occupation(IN_A).unwrap() - e * before).abs() < 1e-12);
    }

    #[test]
    fn switching_conserves_output_photons(
        d in two_mode(4), r2 in 0.0f64..=1.0, e in 0.0f64..=1.0, p in policy(), q in policy(),
    ) {
        let r = Reflection::from_reflectivity(r2).unwrap();
        let eps = Efficiency::new(e).unwrap();
        let mean = |pol: &Policy| {
            let out = propagate(&d, r, eps, pol).unwrap();
            out.dist.mean_occupation("D_A").unwrap() + out.dist.mean_occupation("D_B").unwrap()
        };
        prop_assert!((mean(&p) - mean(&q)).abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetry_negates_imbalance(
        d in two_mode(4), r2 in 0.0f64..=1.0, e in 0.0f64..=1.0, p in policy(),
    ) {
        let r = Reflection::from_reflectivity(r2).unwrap();
        let eps = Efficiency::new(e).unwrap();
        let swapped = d.reorder(&[IN_B, IN_A], &[IN_A, IN_B]).unwrap();
        let (pa, pb) = detector_probs(&propagate(&d, r, eps, &p).unwrap());
        let (qa, qb) = detector_probs(&propagate(&swapped, r, eps, &p.mirrored()).unwrap());
        prop_assert!(((pa - pb) + (qa - qb)).abs() < 1e-12);
    }

    #[test]
    fn split_thermal_is_powerless_for_single_swap_rows(
        nbar in 0.0f64..0.2, r2 in 0.0f64..=1.0, e in 0.0f64..=1.0, row in 0usize..4,
    ) {
        let spec = Source::split_thermal(nbar).unwrap();
        let src = demonlab_core::make_source(&spec, 4).unwrap();
        let policy = Policy::cross_on(ClickPattern::ALL[row]);
        let out = propagate(&src, Reflection::from_reflectivity(r2).unwrap(), Efficiency::new(e).unwrap(), &policy).unwrap();
        let (pa, pb) = detector_probs(&out);
        prop_assert!((pa - pb).abs() < 1e-12);
    }

    #[test]
    fn information_bounds(
        kind in 0usize..4, x in 0.001f64..0.2, v2 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, e in 0.0f64..=1.0,
    ) {
        let spec = match kind {
            0 => Source::uncorrelated(x).unwrap(),
            1 => Source::split_thermal(x).unwrap(),
            2 => Source::correlated(x.sqrt()).unwrap(),
            _ => Source::anti_correlated(x.sqrt(), v2).unwrap(),
        };
        let info = mutual_information(&spec, Reflection::from_reflectivity(r2).unwrap(), Efficiency::new(e).unwrap(), 4).unwrap();
        prop_assert!(info.mutual_info >= 0.0);
        prop_assert!(info.mutual_info <= info.click_entropy + 1e-12);
        prop_assert!(info.mutual_info <= info.photon_entropy + 1e-12);
        prop_assert!(info.click_entropy <= 2.0 + 1e-12);
    }

    #[test]
    fn curves_are_symmetric_and_vanish_at_ends(
        e in 0.0f64..=1.0, v2 in 0.0f64..=1.0, nbar in 0.0f64..0.9, r2 in 0.0f64..=1.0,
    ) {
        let models = [
            PowerModel::Uncorrelated { nbar: MeanPhotonNumber::new(nbar).unwrap() },
            PowerModel::SplitThermal,
            PowerModel::Correlated { eps2: Efficiency::new(e).unwrap() },
            PowerModel::AntiCorrelated {
                eps2: Efficiency::new(e).unwrap(),
                v2: demonlab_core::Visibility::new(v2).unwrap(),
            },
        ];
        for m in &models {
            let f = |x: f64| closed_form_power(m, Normalization::Singles, Reflection::from_reflectivity(x).unwrap()).unwrap();
            prop_assert!((f(r2) - f(1.0 - r2)).abs() < 1e-12);
            prop_assert_eq!(f(0.0), 0.0);
            prop_assert_eq!(f(1.0), 0.0);
        }
    }
}

#[test]
fn single_precision_pipeline() {
    let spec = demonlab_core::SourceSpec::<f32>::correlated(0.1).unwrap().with_drop_vacuum(true);
    let src = demonlab_core::make_source(&spec, 4).unwrap();
    let r = demonlab_core::ReflectionAmplitude::<f32>::from_reflectivity(0.5).unwrap();
    let out = propagate(&src, r, demonlab_core::CouplingEfficiency::lossless(), &Policy::pairing()).unwrap();
    let (pa, pb) = detector_probs(&out);
    assert!((pa - pb - 0.5).abs() < 1e-6);
}
