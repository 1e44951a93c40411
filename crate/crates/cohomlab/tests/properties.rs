use exzero_cohomlab::checks;
use exzero_cohomlab::cochain::{cup, Bar};
use exzero_cohomlab::group::Subgroup;
use exzero_cohomlab::matrix::Mat;
use exzero_cohomlab::pairing::{random_vector, Workspace};
use exzero_cohomlab::{generate_instance, GeneratorConfig, ResourceLimits};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn bar_differential_squares_to_zero(seed in any::<u64>()) {
        let inst = generate_instance(seed, &GeneratorConfig::default()).unwrap();
        let ring = *inst.ring();
        let bar = Bar::new(&ring, &Subgroup::whole(inst.group()), inst.module());
        for i in 0..2 {
            prop_assert!(bar.differential(i + 1).mul(&ring, &bar.differential(i)).is_zero());
        }
    }

    #[test]
    fn selmer_differential_squares_to_zero(seed in any::<u64>()) {
        let inst = generate_instance(seed, &GeneratorConfig::default()).unwrap();
        let ws = Workspace::new(&inst).unwrap();
        let ring = *ws.ring();
        for side in [&ws.sides.x, &ws.sides.dual, &ws.sides.eps] {
            let d0 = side.selmer_differential(0);
            let d1 = side.selmer_differential(1);
            prop_assert!(d1.mul(&ring, &d0).is_zero());
        }
    }

    #[test]
    fn cup_product_satisfies_leibniz(seed in any::<u64>()) {
        let inst = generate_instance(seed, &GeneratorConfig::default()).unwrap();
        let ws = Workspace::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(checks::leibniz(&ws, &mut rng).unwrap());
    }

    #[test]
    fn cup_is_associative(seed in any::<u64>()) {
        let inst = generate_instance(seed, &GeneratorConfig::default()).unwrap();
        let ring = *inst.ring();
        let g = inst.group();
        let one = exzero_cohomlab::module::GModuleData::trivial(g, 1);
        let bar = Bar::new(&ring, &Subgroup::whole(g), &one);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_vector(&ring, &mut rng, bar.dim(1));
        let b = random_vector(&ring, &mut rng, bar.dim(0));
        let c = random_vector(&ring, &mut rng, bar.dim(1));
        let id = Mat::identity(1);
        let left = cup(&bar, 1, &cup(&bar, 1, &a, &bar, 0, &b, &id), &bar, 1, &c, &id);
        let right = cup(&bar, 1, &a, &bar, 1, &cup(&bar, 0, &b, &bar, 1, &c, &id), &id);
        prop_assert_eq!(left, right);
    }

    #[test]
    fn bockstein_is_natural(seed in any::<u64>(), scalar in 0u64..8) {
        let inst = generate_instance(seed, &GeneratorConfig::default()).unwrap();
        let ws = Workspace::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = exzero_cohomlab::generate::sample_classes(&ws, &mut rng);
        prop_assert!(checks::bockstein_naturality(&ws, &classes.x_f, scalar, &ResourceLimits::default()).unwrap());
    }
}
