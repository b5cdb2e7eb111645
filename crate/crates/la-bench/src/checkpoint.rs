//! Versioned binary weight checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic   b"LACP"                      4 bytes
//! version u32 (currently 1)
//! nets    u32 (2: q-network, ranker)
//! per net: layer_count u32, then layer_count x (in u32, out u32)
//! ranker_trained u32 (0/1)
//! per net, per layer: weights (out*in f64, row-major), biases (out f64)
//! ```

use std::fs;
use std::path::Path;

use la_core::learner::{q_network_dims, ranker_dims, CandidateRanker, Mlp, QLearner};

use crate::error::BenchError;

const MAGIC: &[u8; 4] = b"LACP";
const VERSION: u32 = 1;

/// A trained (or freshly initialised) pair of networks.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub qnet: Mlp,
    pub ranker: Mlp,
    pub ranker_trained: bool,
}

impl Checkpoint {
    /// Seeded fresh networks (what training starts from).
    pub fn fresh(seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self {
            qnet: Mlp::new(&q_network_dims(), &mut rng),
            ranker: Mlp::new(&ranker_dims(), &mut rng),
            ranker_trained: false,
        }
    }

    /// Instantiate the learner pair for an agent.
    pub fn instantiate(&self) -> Result<(QLearner, CandidateRanker), BenchError> {
        let q = QLearner::from_network(self.qnet.clone())
            .map_err(|e| BenchError::CheckpointInvalid(e.to_string()))?;
        let r = CandidateRanker::from_network(self.ranker.clone(), self.ranker_trained)
            .map_err(|e| BenchError::CheckpointInvalid(e.to_string()))?;
        Ok((q, r))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        push_u32(&mut out, VERSION);
        push_u32(&mut out, 2);
        for net in [&self.qnet, &self.ranker] {
            let dims = net.dims();
            push_u32(&mut out, (dims.len() - 1) as u32);
            for l in 0..dims.len() - 1 {
                push_u32(&mut out, dims[l] as u32);
                push_u32(&mut out, dims[l + 1] as u32);
            }
        }
        push_u32(&mut out, u32::from(self.ranker_trained));
        for net in [&self.qnet, &self.ranker] {
            for l in 0..net.dims().len() - 1 {
                for w in net.layer_weights(l) {
                    out.extend_from_slice(&w.to_le_bytes());
                }
                for b in net.layer_biases(l) {
                    out.extend_from_slice(&b.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BenchError> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(BenchError::CheckpointInvalid("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(BenchError::CheckpointInvalid(format!(
                "unsupported version {version}"
            )));
        }
        let nets = r.u32()?;
        if nets != 2 {
            return Err(BenchError::CheckpointInvalid(format!(
                "expected 2 networks, found {nets}"
            )));
        }
        let mut all_dims = Vec::new();
        for _ in 0..nets {
            let layers = r.u32()? as usize;
            if layers == 0 || layers > 16 {
                return Err(BenchError::CheckpointInvalid(format!(
                    "implausible layer count {layers}"
                )));
            }
            let mut dims: Vec<usize> = Vec::with_capacity(layers + 1);
            for l in 0..layers {
                let fan_in = r.u32()? as usize;
                let fan_out = r.u32()? as usize;
                if l == 0 {
                    dims.push(fan_in);
                } else if *dims.last().unwrap() != fan_in {
                    return Err(BenchError::CheckpointInvalid(
                        "inconsistent layer dims".into(),
                    ));
                }
                dims.push(fan_out);
            }
            all_dims.push(dims);
        }
        let ranker_trained = r.u32()? != 0;
        let mut nets_out = Vec::new();
        for dims in &all_dims {
            let mut weights = Vec::new();
            let mut biases = Vec::new();
            for l in 0..dims.len() - 1 {
                let (fan_in, fan_out) = (dims[l], dims[l + 1]);
                let mut w = Vec::with_capacity(fan_in * fan_out);
                for _ in 0..fan_in * fan_out {
                    w.push(r.f64()?);
                }
                let mut b = Vec::with_capacity(fan_out);
                for _ in 0..fan_out {
                    b.push(r.f64()?);
                }
                weights.push(w);
                biases.push(b);
            }
            nets_out.push(Mlp::from_parts(dims.clone(), weights, biases));
        }
        if r.pos != bytes.len() {
            return Err(BenchError::CheckpointInvalid(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        let ranker = nets_out.pop().unwrap();
        let qnet = nets_out.pop().unwrap();
        // Shape sanity against the expected architecture.
        if qnet.dims() != q_network_dims() {
            return Err(BenchError::CheckpointInvalid(format!(
                "q-network dims {:?} do not match {:?}",
                qnet.dims(),
                q_network_dims()
            )));
        }
        if ranker.dims() != ranker_dims() {
            return Err(BenchError::CheckpointInvalid(format!(
                "ranker dims {:?} do not match {:?}",
                ranker.dims(),
                ranker_dims()
            )));
        }
        Ok(Self {
            qnet,
            ranker,
            ranker_trained,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), BenchError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        if !path.exists() {
            return Err(BenchError::CheckpointMissing(path.to_path_buf()));
        }
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BenchError> {
        if self.pos + n > self.bytes.len() {
            return Err(BenchError::CheckpointInvalid("truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, BenchError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, BenchError> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }
}
