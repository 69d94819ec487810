use serde::{Deserialize, Serialize};

use super::{Message, Party, ProtocolParams};
use crate::crypto::wire::Wire;
use crate::graph::AssignmentGraph;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traffic {
    pub sent_bits: u64,
    pub received_bits: u64,
    pub sent_bytes: u64,
    pub received_bytes: u64,
}

impl Traffic {
    pub fn total_bits(&self) -> u64 {
        self.sent_bits + self.received_bits
    }

    pub fn total_bytes(&self) -> u64 {
        self.sent_bytes + self.received_bytes
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub step: u8,
    pub sender: Party,
    pub receiver: Party,
    pub message: Message,
    pub bits: u64,
    pub bytes: u64,
}

/// Every message of one round in send order, with running traffic counters.
///
/// The header (parameters and assignment graph) is public: it is what an
/// eavesdropper is assumed to know before the round starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    params: ProtocolParams,
    graph: AssignmentGraph,
    entries: Vec<TranscriptEntry>,
    clients: Vec<Traffic>,
    server: Traffic,
}

impl Transcript {
    pub fn new(params: ProtocolParams, graph: AssignmentGraph) -> Self {
        Self {
            clients: vec![Traffic::default(); graph.n()],
            params,
            graph,
            entries: Vec::new(),
            server: Traffic::default(),
        }
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn graph(&self) -> &AssignmentGraph {
        &self.graph
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn record(&mut self, step: u8, sender: Party, receiver: Party, message: Message) {
        let bits = message.accounted_bits(&self.params);
        let bytes = message.encoded_len() as u64;
        let out = self.traffic_mut(sender);
        out.sent_bits += bits;
        out.sent_bytes += bytes;
        let inc = self.traffic_mut(receiver);
        inc.received_bits += bits;
        inc.received_bytes += bytes;
        self.entries.push(TranscriptEntry {
            step,
            sender,
            receiver,
            message,
            bits,
            bytes,
        });
    }

    fn traffic_mut(&mut self, party: Party) -> &mut Traffic {
        match party {
            Party::Server => &mut self.server,
            Party::Client(i) => &mut self.clients[i as usize],
        }
    }

    /// Running counters as of the last recorded message.
    pub fn totals(&self) -> CommTotals {
        CommTotals {
            clients: self.clients.clone(),
            server: self.server,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommTotals {
    pub clients: Vec<Traffic>,
    pub server: Traffic,
}

/// Recomputes per-party traffic from the entries alone.
pub fn comm_accounting(transcript: &Transcript) -> CommTotals {
    let mut totals = CommTotals {
        clients: vec![Traffic::default(); transcript.graph.n()],
        server: Traffic::default(),
    };
    for e in &transcript.entries {
        let out = totals.party_mut(e.sender);
        out.sent_bits += e.bits;
        out.sent_bytes += e.bytes;
        let inc = totals.party_mut(e.receiver);
        inc.received_bits += e.bits;
        inc.received_bytes += e.bytes;
    }
    totals
}

impl CommTotals {
    pub fn party(&self, party: Party) -> &Traffic {
        match party {
            Party::Server => &self.server,
            Party::Client(i) => &self.clients[i as usize],
        }
    }

    fn party_mut(&mut self, party: Party) -> &mut Traffic {
        match party {
            Party::Server => &mut self.server,
            Party::Client(i) => &mut self.clients[i as usize],
        }
    }
}
