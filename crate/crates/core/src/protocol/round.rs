use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    ClientState, DropoutSchedule, Message, Party, ProtocolError, ProtocolParams, ServerState,
    ShareResponse, Transcript,
};
use crate::crypto::{DhGroup, ResidueVector, ShamirScheme};
use crate::graph::{AssignmentGraph, GraphEvolution, VertexSet};
use crate::seed::derive_rng;

/// Conditions noted while a round runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Diagnostic {
    /// `t > |Adj(i)| + 1`: the client's secrets can never be reconstructed.
    ThresholdExceedsShares {
        client: usize,
        t: usize,
        shares: usize,
    },
    ReliabilityFailure {
        non_informative: Vec<usize>,
    },
    ShareReconstructionMismatch {
        owner: usize,
    },
    StepError {
        step: u8,
        message: String,
    },
}

impl Diagnostic {
    fn from_error(step: u8, e: &ProtocolError) -> Self {
        match e {
            ProtocolError::ReliabilityFailure { non_informative } => {
                Diagnostic::ReliabilityFailure {
                    non_informative: non_informative.clone(),
                }
            }
            ProtocolError::ShareReconstructionMismatch { owner } => {
                Diagnostic::ShareReconstructionMismatch { owner: *owner }
            }
            other => Diagnostic::StepError {
                step,
                message: other.to_string(),
            },
        }
    }
}

/// Wall-clock time spent per step, split between all clients and the server.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTimings {
    pub client: [Duration; 4],
    pub server: [Duration; 4],
}

impl StepTimings {
    fn time<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *slot += start.elapsed();
        out
    }

    pub fn add(&mut self, other: &StepTimings) {
        for k in 0..4 {
            self.client[k] += other.client[k];
            self.server[k] += other.server[k];
        }
    }
}

/// One protocol round driven step by step. Each step takes the set of
/// clients that complete it.
///
/// `Round` is `Clone`, so a caller can branch after any step and explore
/// several dropout patterns from a shared prefix.
#[derive(Debug, Clone)]
pub struct Round {
    params: ProtocolParams,
    group: DhGroup,
    scheme: ShamirScheme,
    clients: Vec<ClientState>,
    server: ServerState,
    transcript: Transcript,
    /// `V0` and each completed step's survivors.
    levels: Vec<VertexSet>,
    diagnostics: Vec<Diagnostic>,
    timings: StepTimings,
}

/// Deterministic uniform models: client `i` draws from stream `("model", i)`.
pub fn synthetic_models(params: &ProtocolParams, master_seed: u64) -> Vec<ResidueVector> {
    (0..params.n)
        .map(|i| {
            let mut rng = derive_rng(master_seed, "model", i as u64);
            ResidueVector::random(params.m, params.bits, &mut rng)
        })
        .collect()
}

impl Round {
    pub fn new(
        params: ProtocolParams,
        graph: AssignmentGraph,
        models: Vec<ResidueVector>,
        master_seed: u64,
    ) -> Result<Self, ProtocolError> {
        Self::with_crypto(
            params,
            graph,
            models,
            master_seed,
            DhGroup::default(),
            ShamirScheme::default(),
        )
    }

    pub fn with_crypto(
        params: ProtocolParams,
        graph: AssignmentGraph,
        models: Vec<ResidueVector>,
        master_seed: u64,
        group: DhGroup,
        scheme: ShamirScheme,
    ) -> Result<Self, ProtocolError> {
        params.validate()?;
        if graph.n() != params.n || models.len() != params.n {
            return Err(ProtocolError::InvalidParams(format!(
                "n = {}, graph has {} vertices, {} models supplied",
                params.n,
                graph.n(),
                models.len()
            )));
        }
        for (i, model) in models.iter().enumerate() {
            if model.dim() != params.m || model.bits() != params.bits {
                return Err(ProtocolError::ModelShape {
                    client: i,
                    m: model.dim(),
                    bits: model.bits(),
                    want_m: params.m,
                    want_bits: params.bits,
                });
            }
        }
        let clients = models
            .into_iter()
            .enumerate()
            .map(|(i, model)| {
                let stream = (u64::from(params.round) << 32) | i as u64;
                let rng = derive_rng(master_seed, "client", stream);
                ClientState::new(i, graph.neighbors(i).to_vec(), model, &group, rng)
            })
            .collect();
        Ok(Self {
            params,
            group,
            scheme,
            clients,
            server: ServerState::new(graph.clone()),
            levels: vec![VertexSet::full(graph.n())],
            transcript: Transcript::new(params, graph),
            diagnostics: Vec::new(),
            timings: StepTimings::default(),
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn clients(&self) -> &[ClientState] {
        &self.clients
    }

    pub fn server(&self) -> &ServerState {
        &self.server
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn timings(&self) -> &StepTimings {
        &self.timings
    }

    /// Steps completed so far.
    pub fn completed_steps(&self) -> u8 {
        (self.levels.len() - 1) as u8
    }

    /// Plaintext oracle: the sum of the given clients' models.
    pub fn plaintext_sum(&self, members: &VertexSet) -> ResidueVector {
        let mut sum = ResidueVector::zeros(self.params.m, self.params.bits);
        for i in members.iter() {
            sum += self.clients[i].model();
        }
        sum
    }

    /// `G0..G4`, once all four steps have run.
    pub fn evolution(&self) -> Option<GraphEvolution> {
        let levels: [VertexSet; 5] = self.levels.clone().try_into().ok()?;
        GraphEvolution::from_levels(self.transcript.graph().clone(), levels).ok()
    }

    fn advance(&mut self, step: u8, survivors: &VertexSet) -> Result<(), ProtocolError> {
        if self.completed_steps() != step {
            return Err(ProtocolError::OutOfOrder {
                expected: self.completed_steps(),
                got: step,
            });
        }
        let prev = self.levels.last().expect("V0 always present");
        if !survivors.is_subset(prev) {
            return Err(ProtocolError::NotNested(step + 1));
        }
        self.levels.push(survivors.clone());
        Ok(())
    }

    /// Step 0 with `V1` completing it.
    pub fn step0(&mut self, v1: &VertexSet) -> Result<(), ProtocolError> {
        self.advance(0, v1)?;
        let clients = &self.clients;
        let adverts: Vec<_> = StepTimings::time(&mut self.timings.client[0], || {
            v1.iter().map(|i| clients[i].advertise()).collect()
        });
        for a in &adverts {
            self.transcript.record(
                0,
                Party::Client(a.client),
                Party::Server,
                Message::AdvertiseKeys(*a),
            );
        }
        let (server, group) = (&mut self.server, &self.group);
        let bundles = StepTimings::time(&mut self.timings.server[0], || {
            server.collect_keys(&adverts, group)
        })?;
        for (j, bundle) in bundles {
            let client = &mut self.clients[j];
            StepTimings::time(&mut self.timings.client[0], || {
                client.receive_bundle(&bundle, group)
            })?;
            self.transcript.record(
                0,
                Party::Server,
                Party::Client(j as u32),
                Message::KeyBundle(bundle),
            );
        }
        Ok(())
    }

    /// Step 1 with `V2` completing it. Forwarded shares reach recipients in `V2`.
    pub fn step1(&mut self, v2: &VertexSet) -> Result<(), ProtocolError> {
        self.advance(1, v2)?;
        let mut uploads = BTreeMap::new();
        for i in v2.iter() {
            let shares = self.clients[i].share_count();
            if self.params.t > shares {
                self.diagnostics.push(Diagnostic::ThresholdExceedsShares {
                    client: i,
                    t: self.params.t,
                    shares,
                });
            }
            let (client, params, scheme) = (&mut self.clients[i], &self.params, &self.scheme);
            let batch = StepTimings::time(&mut self.timings.client[1], || {
                client.deal_shares(params, scheme)
            })?;
            for e in &batch {
                self.transcript.record(
                    1,
                    Party::Client(e.from),
                    Party::Server,
                    Message::EncryptedShares(e.clone()),
                );
            }
            uploads.insert(i, batch);
        }
        let server = &mut self.server;
        let routed = StepTimings::time(&mut self.timings.server[1], || {
            server.route_shares(&uploads)
        });
        for (j, delivered) in routed {
            for e in &delivered {
                self.transcript.record(
                    1,
                    Party::Server,
                    Party::Client(e.to),
                    Message::EncryptedShares(e.clone()),
                );
            }
            let client = &mut self.clients[j];
            StepTimings::time(&mut self.timings.client[1], || {
                client.receive_shares(&delivered)
            })?;
        }
        Ok(())
    }

    /// Step 2 with `V3` uploading masked models.
    pub fn step2(&mut self, v3: &VertexSet) -> Result<(), ProtocolError> {
        self.advance(2, v3)?;
        let mut models = BTreeMap::new();
        for i in v3.iter() {
            let (client, params) = (&self.clients[i], &self.params);
            let masked =
                StepTimings::time(&mut self.timings.client[2], || client.masked_model(params))?;
            self.transcript.record(
                2,
                Party::Client(i as u32),
                Party::Server,
                Message::MaskedModel {
                    client: i as u32,
                    model: masked.clone(),
                },
            );
            models.insert(i, masked);
        }
        let server = &mut self.server;
        StepTimings::time(&mut self.timings.server[2], || {
            server.collect_masked(models)
        });
        Ok(())
    }

    /// First half of Step 3: the survivor list goes to all of `V3`, and the
    /// clients of `V4` answer with shares.
    pub fn share_responses(&mut self, v4: &VertexSet) -> Result<Vec<ShareResponse>, ProtocolError> {
        self.advance(3, v4)?;
        let v3 = self.levels[3].clone();
        let list: Vec<u32> = v3.iter().map(|i| i as u32).collect();
        for j in v3.iter() {
            self.transcript.record(
                3,
                Party::Server,
                Party::Client(j as u32),
                Message::SurvivorList(list.clone()),
            );
        }
        let clients = &self.clients;
        let responses: Vec<_> = StepTimings::time(&mut self.timings.client[3], || {
            v4.iter().map(|i| clients[i].respond(&v3)).collect()
        });
        for r in &responses {
            self.transcript.record(
                3,
                Party::Client(r.client),
                Party::Server,
                Message::ShareResponse(r.clone()),
            );
        }
        Ok(responses)
    }

    /// Second half of Step 3: the server unmasks.
    pub fn finish(&mut self, responses: &[ShareResponse]) -> Result<ResidueVector, ProtocolError> {
        let (server, params, group, scheme) =
            (&mut self.server, &self.params, &self.group, &self.scheme);
        let result = StepTimings::time(&mut self.timings.server[3], || {
            server.unmask(responses, params, group, scheme)
        });
        if let Err(e) = &result {
            self.diagnostics.push(Diagnostic::from_error(3, e));
        }
        result
    }

    /// Step 3 with `V4` responding.
    pub fn step3(&mut self, v4: &VertexSet) -> Result<ResidueVector, ProtocolError> {
        let responses = self.share_responses(v4)?;
        self.finish(&responses)
    }
}

/// Result of a complete round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub aggregate: Option<ResidueVector>,
    pub failure: Option<ProtocolError>,
    /// `Σ_{i∈V3} θ_i`, computed beside the protocol.
    pub expected: ResidueVector,
    pub transcript: Transcript,
    pub evolution: GraphEvolution,
    pub diagnostics: Vec<Diagnostic>,
    pub timings: StepTimings,
}

impl RoundOutcome {
    pub fn aggregate_correct(&self) -> bool {
        self.aggregate.as_ref() == Some(&self.expected)
    }
}

/// Runs Steps 0 to 3 with the survivor sets of `schedule`.
///
/// Configuration problems are errors; anything that goes wrong inside a step
/// is reported in the outcome.
pub fn run_round(
    params: ProtocolParams,
    graph: AssignmentGraph,
    schedule: &DropoutSchedule,
    models: Vec<ResidueVector>,
    master_seed: u64,
) -> Result<RoundOutcome, ProtocolError> {
    if schedule.n() != params.n {
        return Err(ProtocolError::InvalidParams(format!(
            "dropout schedule covers {} clients, n = {}",
            schedule.n(),
            params.n
        )));
    }
    let evolution = schedule.evolution(graph.clone())?;
    let mut round = Round::new(params, graph, models, master_seed)?;
    let levels = schedule.levels();
    let mut failure = None;
    let mut aggregate = None;
    let steps: [fn(&mut Round, &VertexSet) -> Result<(), ProtocolError>; 3] =
        [Round::step0, Round::step1, Round::step2];
    for (k, step) in steps.iter().enumerate() {
        if let Err(e) = step(&mut round, &levels[k + 1]) {
            round.diagnostics.push(Diagnostic::from_error(k as u8, &e));
            failure = Some(e);
            break;
        }
    }
    if failure.is_none() {
        match round.step3(&levels[4]) {
            Ok(sum) => aggregate = Some(sum),
            Err(e) => failure = Some(e),
        }
    }
    Ok(RoundOutcome {
        aggregate,
        failure,
        expected: round.plaintext_sum(&levels[3]),
        transcript: round.transcript,
        evolution,
        diagnostics: round.diagnostics,
        timings: round.timings,
    })
}
