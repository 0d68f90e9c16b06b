//! Serde adapters writing 0-based index sets as 1-based.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(idx: &[usize], s: S) -> Result<S::Ok, S::Error> {
    idx.iter().map(|k| k + 1).collect::<Vec<_>>().serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
    let raw = Vec::<usize>::deserialize(d)?;
    raw.into_iter()
        .map(|k| {
            k.checked_sub(1)
                .ok_or_else(|| serde::de::Error::custom("battlefield indices start at 1"))
        })
        .collect()
}
