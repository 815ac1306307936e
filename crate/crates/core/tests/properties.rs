use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use enkvote::crypto::{
    decode_payload, encode_payload, ep_unwrap, ep_wrap, layer_unwrap, layer_wrap, payload_capacity,
    Password,
};
use enkvote::election::{setup_election, BulletinBoard, ElectionConfig, LocalElection};
use enkvote::enk::EnkSession;
use enkvote::numtheory::{mod_exp, mod_inverse, BlindingExponent, GroupParams, GroupProfile};
use enkvote::seeded::party_rng;

fn q64() -> GroupParams {
    GroupParams::new(
        BigUint::from(14_799_178_233_674_913_383u64),
        GroupProfile::SafePrime,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn three_pass_delivers_any_payload(m in 2u64..14_799_178_233_674_913_381, seed in any::<u64>(), pw in 0u64..1 << 20) {
        let params = q64();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pw = Password::from_index(pw, 20).unwrap();
        let m = BigUint::from(m);
        let mut alice = EnkSession::initiator(params.clone(), pw.clone(), &mut rng).unwrap();
        let mut bob = EnkSession::responder(params, pw, &mut rng).unwrap();
        let m1 = alice.start(&m, &mut rng).unwrap();
        let m2 = bob.blind(&m1, &mut rng).unwrap();
        let m3 = alice.unblind(&m2, &mut rng).unwrap();
        prop_assert_eq!(bob.finish(&m3).unwrap(), m);
    }

    #[test]
    fn exponent_and_inverse_cancel(m in 2u64..14_799_178_233_674_913_381, seed in any::<u64>()) {
        let params = q64();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let e = BlindingExponent::sample(&params, &mut rng).unwrap();
        let m = BigUint::from(m);
        let c = mod_exp(&m, e.exponent(), &params).unwrap();
        prop_assert_eq!(mod_exp(&c, e.inverse(), &params).unwrap(), m);
        prop_assert_eq!(mod_inverse(e.exponent(), params.q_minus_1()).unwrap(), e.inverse().clone());
    }

    #[test]
    fn ep_wrap_round_trips(m in 2u64..14_799_178_233_674_913_381, seed in any::<u64>()) {
        let params = q64();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pw = Password::random(88, &mut rng).unwrap();
        let m = BigUint::from(m);
        let ct = ep_wrap(&pw, &m, &params, &mut rng).unwrap();
        prop_assert_eq!(ep_unwrap(&pw, &ct, &params).unwrap(), m);
    }

    #[test]
    fn layer_round_trips(data in prop::collection::vec(any::<u8>(), 0..200), seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pw = Password::random(88, &mut rng).unwrap();
        let wrapped = layer_wrap(&pw, &data, &mut rng).unwrap();
        prop_assert_eq!(layer_unwrap(&pw, &wrapped).unwrap(), data);
    }

    #[test]
    fn payload_round_trips(data in prop::collection::vec(any::<u8>(), 0..=80)) {
        let params = GroupParams::modp768();
        prop_assume!(data.len() <= payload_capacity(&params));
        let element = encode_payload(&data, &params).unwrap();
        prop_assert!(params.is_quadratic_residue(&element));
        prop_assert_eq!(decode_payload(&element, &params).unwrap(), data);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tally_matches_choices(choices in prop::collection::vec(1usize..=3, 1..6), seed in any::<u64>()) {
        let cfg = ElectionConfig::new(&["ada", "bo", "cy"], choices.len(), GroupParams::modp768());
        let setup = setup_election(&cfg, &mut party_rng(seed, "setup")).unwrap();
        let mut e = LocalElection::new(setup, seed);
        let script: Vec<_> = choices.iter().map(|&c| Some(c)).collect();
        let report = e.run_round(&script).unwrap();
        let counts: Vec<usize> = report.published.tally.iter().map(|(_, n)| *n).collect();
        let want: Vec<usize> = (1..=3).map(|k| choices.iter().filter(|&&c| c == k).count()).collect();
        prop_assert_eq!(counts, want);

        let export = e.counter.export().unwrap();
        let parsed = BulletinBoard::from_export(&export, &e.public.candidates).unwrap();
        prop_assert_eq!(parsed.export(&e.public.candidates).unwrap(), export);
    }
}
