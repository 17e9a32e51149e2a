use std::cmp::Ordering;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{back_translate, similarity, translate, EngineError, TranslationCandidate, TranslationEngine, TranslationRequest};
use crate::lang::LanguageCode;
use crate::par::{self, Exec};

/// Simulated service time of one engine call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencyModel {
    Fixed { ms: u64 },
    Uniform { min_ms: u64, max_ms: u64 },
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel::Fixed { ms: 0 }
    }
}

impl LatencyModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            LatencyModel::Fixed { ms } => ms,
            LatencyModel::Uniform { min_ms, max_ms } => rng.random_range(min_ms..=max_ms.max(min_ms)),
        }
    }
}

struct Slot {
    engine: Arc<dyn TranslationEngine>,
    latency: LatencyModel,
}

/// The engine roster for a session.
pub struct Broker {
    slots: Vec<Slot>,
    exec: Exec,
}

impl Default for Broker {
    fn default() -> Self {
        Broker::new()
    }
}

impl Broker {
    pub fn new() -> Self {
        Broker {
            slots: Vec::new(),
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// Ids and priorities must be unique within a broker.
    pub fn add(&mut self, engine: Arc<dyn TranslationEngine>, latency: LatencyModel) -> Result<(), EngineError> {
        let d = engine.descriptor();
        for s in &self.slots {
            let other = s.engine.descriptor();
            if other.id == d.id {
                return Err(EngineError::InvalidRoster(format!("duplicate engine id `{}`", d.id)));
            }
            if other.priority == d.priority {
                return Err(EngineError::InvalidRoster(format!(
                    "engines `{}` and `{}` share priority {}",
                    other.id, d.id, d.priority
                )));
            }
        }
        self.slots.push(Slot { engine, latency });
        self.slots
            .sort_by_key(|s| s.engine.descriptor().priority);
        Ok(())
    }

    pub fn with<E: TranslationEngine + 'static>(mut self, engine: E, latency: LatencyModel) -> Result<Self, EngineError> {
        self.add(Arc::new(engine), latency)?;
        Ok(self)
    }

    /// Engines in ascending priority.
    pub fn engines(&self) -> impl Iterator<Item = &Arc<dyn TranslationEngine>> {
        self.slots.iter().map(|s| &s.engine)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Same roster with every latency replaced.
    pub fn with_uniform_latency(&self, latency: LatencyModel) -> Broker {
        Broker {
            slots: self
                .slots
                .iter()
                .map(|s| Slot {
                    engine: Arc::clone(&s.engine),
                    latency,
                })
                .collect(),
            exec: self.exec,
        }
    }

    /// Simulated wall time of one selection round: engines run side by side,
    /// each doing a forward and a back translation, so the round lasts as
    /// long as the slowest engine.
    pub fn sample_round_ms<R: Rng + ?Sized>(&self, src: LanguageCode, tgt: LanguageCode, rng: &mut R) -> u64 {
        self.slots
            .iter()
            .filter(|s| s.engine.descriptor().supports(src, tgt))
            .map(|s| s.latency.sample(rng) + s.latency.sample(rng))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateOutcome {
    pub engine_id: String,
    pub priority: u32,
    pub result: Result<TranslationCandidate, EngineError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub winner: TranslationCandidate,
    /// Every participating engine, ascending priority.
    pub candidates: Vec<CandidateOutcome>,
}

fn rank(a: (&TranslationCandidate, u32), b: (&TranslationCandidate, u32)) -> Ordering {
    b.0.similarity
        .total_cmp(&a.0.similarity)
        .then(a.1.cmp(&b.1))
}

/// Highest similarity wins; equal similarities go to the lower priority
/// number. The result does not depend on input order.
pub fn pick_winner<'a, I>(candidates: I) -> Option<&'a TranslationCandidate>
where
    I: IntoIterator<Item = (&'a TranslationCandidate, u32)>,
{
    candidates.into_iter().min_by(|a, b| rank(*a, *b)).map(|c| c.0)
}

fn run_engine(engine: &dyn TranslationEngine, original: &str, req: &TranslationRequest) -> Result<TranslationCandidate, EngineError> {
    let d = engine.descriptor();
    if !d.reverse_capable {
        return Err(EngineError::NotReverseCapable(d.id.clone()));
    }
    let forward = translate(engine, req)?;
    let back = back_translate(engine, &forward, req)?;
    let similarity = similarity(original, &back, req.src);
    Ok(TranslationCandidate {
        engine_id: d.id.clone(),
        forward,
        back,
        similarity,
    })
}

/// Forward- and back-translates `req` with every engine supporting the pair,
/// scores each back-translation against `original` (the untagged source) and
/// returns the best. Engines that fail are kept in the candidate list but
/// cannot win.
pub fn select_best(original: &str, req: &TranslationRequest, broker: &Broker) -> Result<Selection, EngineError> {
    let participants: Vec<&Arc<dyn TranslationEngine>> = broker
        .engines()
        .filter(|e| e.descriptor().supports(req.src, req.tgt))
        .collect();
    if participants.is_empty() {
        return Err(EngineError::NoEngineAvailable(req.src, req.tgt));
    }
    let candidates: Vec<CandidateOutcome> = par::map(broker.exec, &participants, |e| CandidateOutcome {
        engine_id: e.descriptor().id.clone(),
        priority: e.descriptor().priority,
        result: run_engine(e.as_ref(), original, req),
    });
    let winner = pick_winner(
        candidates
            .iter()
            .filter_map(|c| c.result.as_ref().ok().map(|r| (r, c.priority))),
    )
    .cloned();
    match winner {
        Some(winner) => Ok(Selection { winner, candidates }),
        None => Err(EngineError::AllEnginesFailed(
            candidates
                .into_iter()
                .filter_map(|c| c.result.err().map(|e| (c.engine_id, e)))
                .collect(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RequestContext;
    use crate::engines::{
        CipherEngine, EngineDescriptor, Granularity, IdentityEngine, NoisyEngine, UnavailableEngine,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lang(c: &str) -> LanguageCode {
        LanguageCode::parse(c).unwrap()
    }

    fn desc(id: &str, prio: u32) -> EngineDescriptor {
        EngineDescriptor::new(id, [(lang("ja"), lang("en"))], true, prio)
    }

    fn req(text: &str) -> TranslationRequest {
        TranslationRequest::new(lang("ja"), lang("en"), text, RequestContext::default(), Granularity::Sentence)
    }

    fn cand(id: &str, sim: f64) -> TranslationCandidate {
        TranslationCandidate {
            engine_id: id.into(),
            forward: String::new(),
            back: String::new(),
            similarity: sim,
        }
    }

    #[test]
    fn highest_similarity_wins() {
        let cs = [
            cand("GPMT", 0.4930),
            cand("ADAPT", 0.6789),
            cand("UNIV", 0.6781),
            cand("RWKV", 0.8907),
        ];
        let w = pick_winner(cs.iter().enumerate().map(|(i, c)| (c, i as u32))).unwrap();
        assert_eq!(w.engine_id, "RWKV");
        assert_eq!(pick_winner(std::iter::empty()), None);
    }

    #[test]
    fn ties_go_to_lower_priority() {
        let a = cand("a", 0.5);
        let b = cand("b", 0.5);
        assert_eq!(pick_winner([(&a, 2), (&b, 1)]).unwrap().engine_id, "b");
        assert_eq!(pick_winner([(&b, 1), (&a, 2)]).unwrap().engine_id, "b");
    }

    #[test]
    fn single_identity_engine() {
        let broker = Broker::new()
            .with(IdentityEngine::new(desc("identity", 0)), LatencyModel::default())
            .unwrap();
        let sel = select_best("めまいがします。", &req("めまいがします。"), &broker).unwrap();
        assert_eq!(sel.winner.engine_id, "identity");
        assert_eq!(sel.winner.similarity, 1.0);
    }

    #[test]
    fn failures_degrade_gracefully() {
        let broker = Broker::new()
            .with(UnavailableEngine::new(desc("down", 0)), LatencyModel::default())
            .unwrap()
            .with(CipherEngine::new(desc("cipher", 1)), LatencyModel::default())
            .unwrap();
        let sel = select_best("a b", &req("a b"), &broker).unwrap();
        assert_eq!(sel.winner.engine_id, "cipher");
        assert_eq!(sel.candidates.len(), 2);
        assert!(sel.candidates[0].result.is_err());

        let dead = Broker::new()
            .with(UnavailableEngine::new(desc("down", 0)), LatencyModel::default())
            .unwrap();
        assert!(matches!(
            select_best("a", &req("a"), &dead),
            Err(EngineError::AllEnginesFailed(v)) if v.len() == 1
        ));
        let none = Broker::new();
        assert!(matches!(select_best("a", &req("a"), &none), Err(EngineError::NoEngineAvailable(..))));
    }

    #[test]
    fn one_way_engines_cannot_win() {
        let one_way = EngineDescriptor::new("one-way", [(lang("ja"), lang("en"))], false, 0);
        let broker = Broker::new()
            .with(IdentityEngine::new(one_way), LatencyModel::default())
            .unwrap();
        assert!(matches!(select_best("a", &req("a"), &broker), Err(EngineError::AllEnginesFailed(_))));
    }

    #[test]
    fn reversible_beats_noisy() {
        let noisy = NoisyEngine::new(desc("noisy", 1), Box::new(IdentityEngine::new(desc("inner", 9))), 0.4, 1);
        let broker = Broker::new()
            .with(noisy, LatencyModel::default())
            .unwrap()
            .with(CipherEngine::new(desc("cipher", 0)), LatencyModel::default())
            .unwrap();
        let text = "one two three four five six";
        let sel = select_best(text, &req(text), &broker).unwrap();
        assert_eq!(sel.winner.engine_id, "cipher");
        assert_eq!(sel.winner.similarity, 1.0);
        let noisy_sim = sel.candidates[1].result.as_ref().unwrap().similarity;
        assert!(noisy_sim < 1.0);
    }

    #[test]
    fn roster_rules() {
        let mut b = Broker::new();
        b.add(Arc::new(IdentityEngine::new(desc("x", 0))), LatencyModel::default()).unwrap();
        assert!(b.add(Arc::new(IdentityEngine::new(desc("x", 1))), LatencyModel::default()).is_err());
        assert!(b.add(Arc::new(IdentityEngine::new(desc("y", 0))), LatencyModel::default()).is_err());
    }

    #[test]
    fn round_time_is_slowest_engine() {
        let b = Broker::new()
            .with(IdentityEngine::new(desc("a", 0)), LatencyModel::Fixed { ms: 10 })
            .unwrap()
            .with(CipherEngine::new(desc("b", 1)), LatencyModel::Fixed { ms: 40 })
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(b.sample_round_ms(lang("ja"), lang("en"), &mut rng), 80);
        assert_eq!(b.sample_round_ms(lang("en"), lang("ja"), &mut rng), 0);
    }
}
