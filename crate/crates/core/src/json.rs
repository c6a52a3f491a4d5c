//! JSON decoding with JSON-pointer error paths.

use serde::de::DeserializeOwned;
use serde_path_to_error::Segment;

use crate::error::{Error, Result};

pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(convert)
}

pub fn from_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(convert)
}

fn convert<E: std::fmt::Display>(err: serde_path_to_error::Error<E>) -> Error {
    let mut path = String::new();
    for seg in err.path().iter() {
        match seg {
            Segment::Seq { index } => path.push_str(&format!("/{index}")),
            Segment::Map { key } => path.push_str(&format!("/{}", escape(key))),
            Segment::Enum { variant } => path.push_str(&format!("/{}", escape(variant))),
            Segment::Unknown => path.push_str("/?"),
        }
    }
    let message = err.inner().to_string();
    // serde reports a missing field at its parent; point at the field itself.
    if let Some(field) = missing_field(&message) {
        path.push('/');
        path.push_str(&escape(field));
    }
    if path.is_empty() {
        path.push('/');
    }
    Error::schema(path, strip_position(&message))
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

fn strip_position(message: &str) -> String {
    match message.find(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

fn escape(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

#[cfg(test)]
mod tests {
    use serde::Deserialize;

    use super::*;

    #[derive(Debug, Deserialize)]
    #[allow(dead_code)]
    struct Outer {
        items: Vec<Inner>,
    }

    #[derive(Debug, Deserialize)]
    #[allow(dead_code)]
    struct Inner {
        n: u32,
    }

    #[test]
    fn pointer_paths() {
        let e = from_str::<Outer>(r#"{"items":[{"n":1},{"n":"x"}]}"#).unwrap_err();
        assert!(matches!(e, Error::Schema { ref path, .. } if path == "/items/1/n"), "{e:?}");
        let e = from_str::<Outer>(r#"{"items":[{}]}"#).unwrap_err();
        assert!(matches!(e, Error::Schema { ref path, .. } if path == "/items/0/n"), "{e:?}");
        let e = from_str::<Outer>(r#"{}"#).unwrap_err();
        assert!(matches!(e, Error::Schema { ref path, .. } if path == "/items"), "{e:?}");
    }
}
