use proptest::prelude::*;
use sonospace_core::protocol::{decode_audio_frame, encode_audio_frame, AUDIO_HEADER_BYTES};
use sonospace_testkit::checks;

#[test]
fn scenes_survive_documents() {
    checks::scene_round_trip(200, 40_000).assert();
}

#[test]
fn float_wavs_are_bit_exact() {
    checks::wav_round_trip(41).assert();
}

#[test]
fn protocol_messages_round_trip() {
    checks::protocol_round_trip(300, 42).assert();
}

#[test]
fn audio_frames_have_exact_layout() {
    checks::audio_framing(43).assert();
}

proptest! {
    #[test]
    fn any_frame_decodes_to_itself(seq in any::<u32>(), samples in proptest::collection::vec(any::<f32>(), 0..600)) {
        let bytes = encode_audio_frame(seq, &samples);
        prop_assert_eq!(bytes.len(), AUDIO_HEADER_BYTES + 4 * samples.len());
        let frame = decode_audio_frame(&bytes).unwrap();
        prop_assert_eq!(frame.seq, seq);
        prop_assert_eq!(frame.samples.len(), samples.len());
        for (a, b) in frame.samples.iter().zip(&samples) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_frames_are_rejected(seq in any::<u32>(), n in 1usize..64, cut in 1usize..8) {
        let bytes = encode_audio_frame(seq, &vec![0.5; n]);
        prop_assert!(decode_audio_frame(&bytes[..bytes.len() - cut.min(bytes.len())]).is_err());
    }
}
