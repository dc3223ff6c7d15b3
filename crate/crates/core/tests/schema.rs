use cdkernel::kernel::json::parse_spec;
use serde_json::{json, Value};

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/kernel_spec.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn schema_fields_match_the_loader() {
    let schema = schema();
    let variants = schema["oneOf"].as_array().unwrap();
    assert_eq!(variants.len(), 14);
    for v in variants {
        let family = v["properties"]["family"]["const"].as_str().unwrap();
        for key in v["properties"].as_object().unwrap().keys() {
            let doc = json!({ "family": family, key.as_str(): null }).to_string();
            let message = parse_spec(&doc).unwrap_err().to_string();
            assert!(!message.contains("unknown"), "{family}.{key}: {message}");
        }
        let doc = json!({ "family": family, "bogus": 1 }).to_string();
        assert!(parse_spec(&doc).unwrap_err().to_string().contains("unknown field"), "{family}");
    }
}

#[test]
fn schema_accepts_written_specs() {
    let schema = schema();
    let families: Vec<&str> = schema["oneOf"].as_array().unwrap().iter().map(|v| v["properties"]["family"]["const"].as_str().unwrap()).collect();
    for text in [
        r#"{"family": "power_disc", "s": 2}"#,
        r#"{"family": "flag", "k0": {"family": "power_disc", "s": 1}, "k1": {"family": "diagonal_series", "coefficients": [0]}}"#,
        r#"{"family": "frame_scaled", "wrap": {"family": "power_disc", "s": 3}, "poly": [1, [0, 0.5]]}"#,
    ] {
        let v: Value = serde_json::from_str(text).unwrap();
        assert!(families.contains(&v["family"].as_str().unwrap()));
        parse_spec(text).unwrap();
    }
}
