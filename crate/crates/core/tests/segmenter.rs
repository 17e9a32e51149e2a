use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use simulpipe::corpus::{generate_synthetic, GeneratorSpec, LabeledStream, LengthDist};
use simulpipe::eval::boundary_f1;
use simulpipe::segment::tiles;
use simulpipe::segmenter::{
    decisions_to_segments, segment_tokens, train, BoundaryDecision, SegmenterConfig, SegmenterError, SegmenterModel,
    StreamingSegmenter,
};
use simulpipe::token::stream_from_surfaces;
use simulpipe::SegmentKind;

const VOCAB: &[&str] = &["a", "b", "c", ",", "."];

/// A model with arbitrary weights on every unigram feature it could see.
fn random_model(max_delay: usize, weights: &[f64]) -> Arc<SegmenterModel> {
    let mut m = SegmenterModel::untrained(SegmenterConfig::new(SegmentKind::Chunk, max_delay));
    let mut w = weights.iter().cycle();
    for h in 0..=max_delay {
        for tok in VOCAB {
            m.head_mut(h).insert(format!("u0:{tok}"), *w.next().unwrap());
            for j in 1..=h {
                m.head_mut(h).insert(format!("r{j}:{tok}"), *w.next().unwrap());
            }
        }
    }
    Arc::new(m)
}

fn words() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(proptest::sample::select(VOCAB).prop_map(String::from), 0..40)
}

fn feed_in_batches(model: &Arc<SegmenterModel>, toks: &[String], cuts: &[usize]) -> Vec<BoundaryDecision> {
    let events = stream_from_surfaces("s", toks, 10);
    let mut seg = StreamingSegmenter::new(Arc::clone(model));
    let mut out = Vec::new();
    let mut i = 0;
    let mut cut = cuts.iter().cycle();
    while i < events.len() {
        let n = (*cut.next().unwrap()).clamp(1, events.len() - i);
        out.extend(seg.feed_batch(&events[i..i + n]).unwrap());
        i += n;
    }
    out.extend(seg.flush());
    out
}

proptest! {
    #[test]
    fn streaming_laws(
        toks in words(),
        n in 0usize..4,
        weights in proptest::collection::vec(-4.0f64..4.0, 1..30),
        cuts in proptest::collection::vec(1usize..6, 1..5),
    ) {
        let model = random_model(n, &weights);
        let (decisions, segments) = segment_tokens(&model, &toks);

        // one verdict per position, released in order
        let positions: Vec<usize> = decisions.iter().map(|d| d.position).collect();
        prop_assert_eq!(positions, (0..toks.len()).collect::<Vec<_>>());
        // delay bound
        prop_assert!(decisions.iter().all(|d| d.decided_at >= d.position && d.delay() <= n));
        // lossless tiling
        prop_assert!(tiles(&segments, toks.len()));
        let flat: Vec<String> = segments.iter().flat_map(|s| s.tokens.clone()).collect();
        prop_assert_eq!(&flat, &toks);
        // a position still pending at flush time is forced to a boundary
        if let Some(last) = decisions.last() {
            prop_assert!(last.boundary || last.delay() == n);
        }
        // determinism and batch-size independence
        prop_assert_eq!(&segment_tokens(&model, &toks).0, &decisions);
        prop_assert_eq!(&feed_in_batches(&model, &toks, &cuts), &decisions);
    }
}

#[test]
fn decisions_from_marker_run() {
    let mut m = SegmenterModel::untrained(SegmenterConfig::new(SegmentKind::Chunk, 1));
    m.head_mut(0).insert("bias".into(), -4.0);
    m.head_mut(1).insert("bias".into(), -4.0);
    m.head_mut(0).insert("u0:.".into(), 8.0);
    let (d, segs) = segment_tokens(&Arc::new(m), &["a", "b", ".", "c", "d", "."]);
    assert_eq!(d.iter().filter(|d| d.boundary).map(|d| d.position).collect::<Vec<_>>(), vec![2, 5]);
    assert_eq!(segs.iter().map(|s| s.tokens.len()).collect::<Vec<_>>(), vec![3, 3]);
    assert!(matches!(
        decisions_to_segments(&d[..3], &["a", "b", ".", "c"], SegmentKind::Chunk),
        Err(SegmenterError::IncompleteDecisions(3))
    ));
}

fn marker_corpus(streams: usize, seed: u64) -> Vec<LabeledStream> {
    let spec = GeneratorSpec::marker(streams, LengthDist::Uniform { min: 2, max: 6 }, LengthDist::Uniform { min: 2, max: 4 });
    generate_synthetic(&spec, seed).unwrap()
}

fn mean_segment_len(model: &Arc<SegmenterModel>, streams: &[LabeledStream]) -> f64 {
    let (mut tokens, mut segs) = (0, 0);
    for s in streams {
        let (_, segments) = segment_tokens(model, &s.tokens);
        tokens += s.tokens.len();
        segs += segments.len();
    }
    tokens as f64 / segs as f64
}

#[test]
fn trained_marker_model_matches_rule() {
    let cfg = SegmenterConfig::new(SegmentKind::Chunk, 2);
    let model = Arc::new(train(&marker_corpus(200, 1), cfg, 5, 3).unwrap());
    for s in marker_corpus(50, 2) {
        let (d, _) = segment_tokens(&model, &s.tokens);
        // the rule oracle: a boundary follows every marker token
        let rule: BTreeSet<usize> = s
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == "," || *t == ".")
            .map(|(i, _)| i)
            .collect();
        assert_eq!(boundary_f1(&rule, &d, s.tokens.len()).unwrap().f1, 1.0);
    }
}

#[test]
fn chunk_segments_are_shorter_than_sentences() {
    let corpus = marker_corpus(150, 5);
    let dev = marker_corpus(40, 6);
    let chunk = Arc::new(train(&corpus, SegmenterConfig::new(SegmentKind::Chunk, 1), 5, 0).unwrap());
    let sentence = Arc::new(train(&corpus, SegmenterConfig::new(SegmentKind::Sentence, 1), 5, 0).unwrap());
    assert!(mean_segment_len(&chunk, &dev) < mean_segment_len(&sentence, &dev));
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chunk.json");
    let model = train(&marker_corpus(20, 9), SegmenterConfig::new(SegmentKind::Chunk, 1), 2, 0).unwrap();
    model.save(&path).unwrap();
    assert_eq!(SegmenterModel::load(&path).unwrap(), model);
    assert!(matches!(
        SegmenterModel::load(&dir.path().join("missing.json")),
        Err(SegmenterError::Io(msg)) if msg.contains("missing.json")
    ));
}
