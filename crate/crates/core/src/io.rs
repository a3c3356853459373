//! Tensor file format.
//!
//! ```json
//! {"shape": [2, 2, 2], "scalar": "rational", "data": ["1/1", "0/1", ...]}
//! ```
//!
//! `data` is row-major. Float files hold JSON numbers; rational files hold
//! `"p/q"` strings (plain integers and decimal literals are also accepted on read).

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Result, TensorError};
use crate::scalar::{rational_from_f64, Rational, Scalar, ScalarKind};
use crate::tensor::{DenseTensor, ExactTensor, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    F64(Tensor),
    Rational(ExactTensor),
}

impl AnyTensor {
    pub fn shape(&self) -> &[usize] {
        match self {
            AnyTensor::F64(t) => t.shape(),
            AnyTensor::Rational(t) => t.shape(),
        }
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            AnyTensor::F64(_) => ScalarKind::F64,
            AnyTensor::Rational(_) => ScalarKind::Rational,
        }
    }

    pub fn to_f64(&self) -> Tensor {
        match self {
            AnyTensor::F64(t) => t.clone(),
            AnyTensor::Rational(t) => t.to_f64(),
        }
    }

    /// Exact conversion; every finite float is a dyadic rational.
    pub fn to_rational(&self) -> Result<ExactTensor> {
        match self {
            AnyTensor::Rational(t) => Ok(t.clone()),
            AnyTensor::F64(t) => {
                let data = t
                    .data()
                    .iter()
                    .map(|&x| {
                        rational_from_f64(x)
                            .ok_or_else(|| TensorError::Parse(format!("non-finite entry {x}")))
                    })
                    .collect::<Result<Vec<Rational>>>()?;
                DenseTensor::new(t.shape().to_vec(), data)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyTensor::F64(t) => tensor_to_json(t),
            AnyTensor::Rational(t) => tensor_to_json(t),
        }
    }
}

pub fn tensor_to_json<T: Scalar>(t: &DenseTensor<T>) -> Value {
    json!({
        "shape": t.shape(),
        "scalar": T::KIND,
        "data": t.data().iter().map(Scalar::to_json).collect::<Vec<_>>(),
    })
}

fn entries<T: Scalar>(shape: Vec<usize>, data: &[Value]) -> Result<DenseTensor<T>> {
    let parsed = data
        .iter()
        .enumerate()
        .map(|(i, v)| {
            T::from_json(v).ok_or_else(|| TensorError::Parse(format!("entry {i} ({v}) is not a valid {:?} scalar", T::KIND)))
        })
        .collect::<Result<Vec<T>>>()?;
    DenseTensor::new(shape, parsed).map_err(|e| TensorError::Parse(e.to_string()))
}

pub fn tensor_from_json(v: &Value) -> Result<AnyTensor> {
    let obj = v
        .as_object()
        .ok_or_else(|| TensorError::Parse("tensor file must be a JSON object".into()))?;
    let shape = obj
        .get("shape")
        .and_then(Value::as_array)
        .ok_or_else(|| TensorError::Parse("missing array field 'shape'".into()))?
        .iter()
        .map(|d| {
            d.as_u64()
                .map(|d| d as usize)
                .ok_or_else(|| TensorError::Parse(format!("bad dimension {d}")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let data = obj
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| TensorError::Parse("missing array field 'data'".into()))?;
    let kind: ScalarKind = match obj.get("scalar") {
        None => ScalarKind::F64,
        Some(s) => serde_json::from_value(s.clone())
            .map_err(|_| TensorError::Parse(format!("unknown scalar kind {s}")))?,
    };
    Ok(match kind {
        ScalarKind::F64 => AnyTensor::F64(entries(shape, data)?),
        ScalarKind::Rational => AnyTensor::Rational(entries(shape, data)?),
    })
}

pub fn parse_tensor(text: &str) -> Result<AnyTensor> {
    let v: Value = serde_json::from_str(text).map_err(|e| TensorError::Parse(e.to_string()))?;
    tensor_from_json(&v)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<AnyTensor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| TensorError::Io(format!("{}: {e}", path.display())))?;
    parse_tensor(&text)
}

pub fn write_json(path: impl AsRef<Path>, v: &Value) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(v).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| TensorError::Io(format!("{}: {e}", path.display())))
}

pub fn write_tensor<T: Scalar>(path: impl AsRef<Path>, t: &DenseTensor<T>) -> Result<()> {
    write_json(path, &tensor_to_json(t))
}
