//! Report documents.
//!
//! Every float is written with 17 significant digits, which round-trips
//! `f64` exactly, so echoed inputs re-parse to the same problem and the
//! same digest. Reports carry no timestamp: identical invocations produce
//! identical bytes.

use std::io;

use qef_core::matrix::{CMat, RMat};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Delegates layout to `F` and prints floats as `{:.16e}`.
struct Digits17<F>(F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for Digits17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

fn write_with<F: Formatter>(value: &Value, formatter: F) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(formatter));
    value.serialize(&mut ser).expect("serializing a JSON value into memory cannot fail");
    out
}

pub fn to_pretty(value: &Value) -> Vec<u8> {
    let mut out = write_with(value, PrettyFormatter::with_indent(b"  "));
    out.push(b'\n');
    out
}

/// `sha256:<hex>` of the compact 17-digit serialization.
pub fn digest(value: &Value) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(write_with(value, CompactFormatter))))
}

pub fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn real_matrix(m: &RMat) -> Value {
    Value::Array((0..m.nrows()).map(|r| json!(m.row(r).iter().collect::<Vec<_>>())).collect())
}

pub fn complex_matrix(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array(m.row(r).iter().map(|z| complex(*z)).collect()))
            .collect(),
    )
}

/// Finite values as numbers, others as strings (`"inf"`, `"NaN"`).
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}
