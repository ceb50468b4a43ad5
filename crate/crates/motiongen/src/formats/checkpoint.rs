//! Binary checkpoints: little-endian, fixed field order.
//!
//! Layout: the 8-byte magic `MGCKPT\0\0`, a `u32` format version and a `u8`
//! kind (1 model, 2 classifier), then a common block (step, final flag,
//! seed, config hash, skeleton text, action names), the kind's
//! hyperparameters, the normalizer, every named parameter tensor with its
//! shape, and for models the optional Adam state and random-stream position.
//! Strings are `u32` byte length plus UTF-8; tensors are `u64` rows, `u64`
//! columns and row-major `f64` data.

use std::path::Path;

use motiongen_core::data::Normalizer;
use motiongen_core::eval::MotionClassifier;
use motiongen_core::neural::{AdamConfig, AdamState, Params, Tensor};
use motiongen_core::vae::{VaeConfig, VaeModel};
use motiongen_core::{rng_from_seed, Rng, Skeleton};
use rand::SeedableRng;

use super::skeleton::{parse_skeleton, skeleton_to_string};
use crate::error::{read_bytes, write_file, CliError, Result};

const MAGIC: &[u8; 8] = b"MGCKPT\0\0";
const VERSION: u32 = 1;
const KIND_MODEL: u8 = 1;
const KIND_CLASSIFIER: u8 = 2;

#[derive(Debug, Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn floats(&mut self, v: &[f64]) {
        self.usize(v.len());
        v.iter().for_each(|&x| self.f64(x));
    }
    fn tensor(&mut self, t: &Tensor) {
        self.usize(t.rows());
        self.usize(t.cols());
        t.data().iter().for_each(|&x| self.f64(x));
    }
}

#[derive(Debug)]
struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("corrupt checkpoint: {msg}"))
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(corrupt(format!("truncated at byte {}", self.pos)));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| corrupt("size does not fit in memory"))
    }
    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(corrupt(format!("invalid flag {v}"))),
        }
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("string is not UTF-8"))
    }
    fn floats(&mut self) -> Result<Vec<f64>> {
        let n = self.usize()?;
        if n > (self.data.len() - self.pos) / 8 {
            return Err(corrupt("array longer than the file"));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn tensor(&mut self) -> Result<Tensor> {
        let (rows, cols) = (self.usize()?, self.usize()?);
        let n = rows.checked_mul(cols).filter(|&n| n <= (self.data.len() - self.pos) / 8);
        let n = n.ok_or_else(|| corrupt("tensor larger than the file"))?;
        let data = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Tensor::new(rows, cols, data).map_err(corrupt)
    }
    fn finish(&self) -> Result<()> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(corrupt(format!("{} trailing bytes", self.data.len() - self.pos)))
        }
    }
}

/// Fields shared by both checkpoint kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub step: u64,
    pub is_final: bool,
    pub seed: u64,
    pub config_hash: String,
    pub skeleton: Skeleton,
    pub actions: Vec<String>,
}

fn write_common(w: &mut Writer, kind: u8, p: &Provenance) {
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.u8(kind);
    w.u64(p.step);
    w.u8(p.is_final as u8);
    w.u64(p.seed);
    w.str(&p.config_hash);
    w.str(&skeleton_to_string(&p.skeleton));
    w.u32(p.actions.len() as u32);
    p.actions.iter().for_each(|a| w.str(a));
}

fn read_common(r: &mut Reader, path: &Path, kind: u8) -> Result<Provenance> {
    if r.take(8)? != MAGIC {
        return Err(corrupt("not a motiongen checkpoint"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    let found = r.u8()?;
    if found != kind {
        let name = |k| if k == KIND_MODEL { "model" } else { "classifier" };
        return Err(CliError::validation(format!(
            "{}: expected a {} checkpoint, found kind {found}",
            path.display(),
            name(kind)
        )));
    }
    let step = r.u64()?;
    let is_final = r.bool()?;
    let seed = r.u64()?;
    let config_hash = r.str()?;
    let skeleton = parse_skeleton(path, &r.str()?)?;
    let count = r.u32()?;
    let actions = (0..count).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    Ok(Provenance {
        step,
        is_final,
        seed,
        config_hash,
        skeleton,
        actions,
    })
}

fn write_normalizer(w: &mut Writer, n: &Normalizer) {
    w.usize(n.root);
    w.floats(&n.mean);
    w.floats(&n.std);
}

fn read_normalizer(r: &mut Reader, skeleton: &Skeleton) -> Result<Normalizer> {
    let n = Normalizer {
        root: r.usize()?,
        mean: r.floats()?,
        std: r.floats()?,
    };
    let width = 3 * skeleton.joint_count();
    if n.root != skeleton.root() || n.mean.len() != width || n.std.len() != width {
        return Err(corrupt("normalizer disagrees with the stored skeleton"));
    }
    Ok(n)
}

fn write_params(w: &mut Writer, p: &Params) {
    w.u32(p.len() as u32);
    for (name, t) in p.names().iter().zip(p.values()) {
        w.str(name);
        w.tensor(t);
    }
}

/// Reads tensors into `params`, whose names and shapes must match.
fn read_params(r: &mut Reader, params: &mut Params) -> Result<()> {
    let count = r.u32()? as usize;
    if count != params.len() {
        return Err(corrupt(format!("{count} parameter tensors, model has {}", params.len())));
    }
    let mut values = Vec::with_capacity(count);
    for expected in params.names() {
        let name = r.str()?;
        if name != *expected {
            return Err(corrupt(format!("parameter `{name}` where `{expected}` was expected")));
        }
        values.push(r.tensor()?);
    }
    params.load_values(values).map_err(corrupt)
}

/// A trained (or training) model with everything needed to resume.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub provenance: Provenance,
    pub model: VaeModel,
    pub adam: Option<AdamState>,
    pub rng: Option<Rng>,
}

impl ModelCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        write_common(&mut w, KIND_MODEL, &self.provenance);
        let c = &self.model.config;
        for v in [
            c.pose_dim,
            c.bone_count,
            c.action_count,
            c.latent_dim,
            c.hidden_dim,
            c.encoder_out,
            c.sequence_length,
            c.generator_layers,
        ] {
            w.usize(v);
        }
        w.f64(c.lambda_kl);
        w.f64(c.teacher_forcing);
        write_normalizer(&mut w, &self.model.normalizer);
        write_params(&mut w, &self.model.params);
        match &self.adam {
            Some(a) => {
                w.u8(1);
                let c = a.config;
                [c.lr, c.beta1, c.beta2, c.eps, c.weight_decay, c.max_grad_norm].iter().for_each(|&v| w.f64(v));
                w.u64(a.step);
                a.first_moment.iter().chain(&a.second_moment).for_each(|t| w.tensor(t));
            }
            None => w.u8(0),
        }
        match &self.rng {
            Some(rng) => {
                w.u8(1);
                w.0.extend_from_slice(&rng.get_seed());
                w.u64(rng.get_stream());
                w.0.extend_from_slice(&rng.get_word_pos().to_le_bytes());
            }
            None => w.u8(0),
        }
        w.0
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { data: bytes, pos: 0 };
        let provenance = read_common(&mut r, path, KIND_MODEL)?;
        let mut dims = [0usize; 8];
        for d in &mut dims {
            *d = r.usize()?;
        }
        let config = VaeConfig {
            pose_dim: dims[0],
            bone_count: dims[1],
            action_count: dims[2],
            latent_dim: dims[3],
            hidden_dim: dims[4],
            encoder_out: dims[5],
            sequence_length: dims[6],
            generator_layers: dims[7],
            lambda_kl: r.f64()?,
            teacher_forcing: r.f64()?,
        };
        if config.pose_dim != 3 * provenance.skeleton.joint_count()
            || config.bone_count != provenance.skeleton.bone_count()
            || config.action_count != provenance.actions.len()
        {
            return Err(corrupt("model sizes disagree with the stored skeleton or vocabulary"));
        }
        let normalizer = read_normalizer(&mut r, &provenance.skeleton)?;
        let mut model = VaeModel::new(config, normalizer, &mut rng_from_seed(0)).map_err(corrupt)?;
        read_params(&mut r, &mut model.params)?;
        let adam = if r.bool()? {
            let config = AdamConfig {
                lr: r.f64()?,
                beta1: r.f64()?,
                beta2: r.f64()?,
                eps: r.f64()?,
                weight_decay: r.f64()?,
                max_grad_norm: r.f64()?,
            };
            let step = r.u64()?;
            let n = model.params.len();
            let mut moments = (0..2 * n).map(|_| r.tensor()).collect::<Result<Vec<_>>>()?;
            let second_moment = moments.split_off(n);
            for (m, p) in moments.iter().chain(&second_moment).zip(model.params.values().iter().cycle()) {
                if m.shape() != p.shape() {
                    return Err(corrupt("optimizer moment shape differs from its parameter"));
                }
            }
            Some(AdamState {
                config,
                step,
                first_moment: moments,
                second_moment,
            })
        } else {
            None
        };
        let rng = if r.bool()? {
            let mut rng = Rng::from_seed(r.array()?);
            rng.set_stream(r.u64()?);
            rng.set_word_pos(u128::from_le_bytes(r.array()?));
            Some(rng)
        } else {
            None
        };
        r.finish()?;
        Ok(ModelCheckpoint {
            provenance,
            model,
            adam,
            rng,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(path, &read_bytes(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_bytes())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierCheckpoint {
    pub provenance: Provenance,
    pub classifier: MotionClassifier,
    pub test_accuracy: f64,
}

impl ClassifierCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        write_common(&mut w, KIND_CLASSIFIER, &self.provenance);
        w.usize(self.classifier.feature_dim());
        w.f64(self.test_accuracy);
        write_normalizer(&mut w, &self.classifier.normalizer);
        write_params(&mut w, &self.classifier.params);
        w.0
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { data: bytes, pos: 0 };
        let provenance = read_common(&mut r, path, KIND_CLASSIFIER)?;
        let hidden = r.usize()?;
        let test_accuracy = r.f64()?;
        let normalizer = read_normalizer(&mut r, &provenance.skeleton)?;
        let mut classifier =
            MotionClassifier::new(normalizer, provenance.actions.len(), hidden, &mut rng_from_seed(0)).map_err(corrupt)?;
        read_params(&mut r, &mut classifier.params)?;
        r.finish()?;
        Ok(ClassifierCheckpoint {
            provenance,
            classifier,
            test_accuracy,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(path, &read_bytes(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_bytes())
    }
}
