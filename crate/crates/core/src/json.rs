//! Integer encoding shared by every JSON export: machine-size integers are
//! JSON numbers, larger ones are decimal strings.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::Value;

pub fn int_to_value(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(n.to_string()),
    }
}

pub fn value_to_int(v: &Value) -> Result<BigInt, String> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| format!("non-integer number {n}")),
        Value::String(s) => s.parse().map_err(|_| format!("invalid integer string '{s}'")),
        other => Err(format!("expected integer, got {other}")),
    }
}
