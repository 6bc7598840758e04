use std::io::Read;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Map, Value};

use mavkit_core::catalog::{Catalog, FieldValue};
use mavkit_core::frame::{parse_bytes, CrcVerdict, Frame};
use mavkit_core::signing::{compute_sig48, SecretKey};
use mavkit_core::transport::{capture_read, Direction};
use mavkit_core::Parser;

use crate::{runtime, CliError, CliResult, KeyArgs};

#[derive(Debug, Args)]
pub struct MavdumpArgs {
    /// A capture file, or a hex string; `-` reads hex from stdin.
    input: Option<String>,
    /// Treat the input as hex even if a file of that name exists.
    #[arg(long, conflicts_with = "capture")]
    hex: bool,
    /// Treat the input as a capture file.
    #[arg(long)]
    capture: bool,
    #[command(flatten)]
    key: KeyArgs,
    /// One JSON object per frame.
    #[arg(long)]
    machine: bool,
}

/// One frame to list, with its capture context when it came from a file.
struct Item {
    timestamp_us: Option<u64>,
    direction: Option<Direction>,
    parsed: Result<(Frame, CrcVerdict), String>,
}

fn hex_input(text: &str) -> Result<Vec<u8>, CliError> {
    let clean: String = text
        .split_whitespace()
        .flat_map(|w| w.trim_start_matches("0x").chars())
        .filter(|c| *c != ':')
        .collect();
    hex::decode(&clean).map_err(|e| CliError::Usage(format!("bad hex input: {e}")))
}

fn from_hex(bytes: &[u8], catalog: &Catalog) -> Vec<Item> {
    let mut parser = Parser::new();
    let mut frames = parser.feed(bytes, catalog);
    frames.extend(parser.finish(catalog));
    frames
        .into_iter()
        .map(|p| Item {
            timestamp_us: None,
            direction: None,
            parsed: Ok((p.frame, p.verdict)),
        })
        .collect()
}

fn from_capture(path: &Path, catalog: &Catalog) -> Result<Vec<Item>, CliError> {
    let records =
        capture_read(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(records
        .into_iter()
        .map(|r| Item {
            timestamp_us: Some(r.timestamp_us),
            direction: Some(r.direction),
            parsed: parse_bytes(&r.frame, catalog).map_err(|e| e.to_string()),
        })
        .collect())
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::ToVehicle => "to-vehicle",
        Direction::ToGcs => "to-gcs",
    }
}

fn crc_text(v: CrcVerdict) -> &'static str {
    match v {
        CrcVerdict::CrcOk => "CRC OK",
        CrcVerdict::CrcBad => "CRC BAD",
        CrcVerdict::UnknownMsgId => "CRC UNKNOWN",
    }
}

fn field_json(v: &FieldValue) -> Value {
    match *v {
        FieldValue::U8(x) => json!(x),
        FieldValue::U16(x) => json!(x),
        FieldValue::U32(x) => json!(x),
        FieldValue::U64(x) => json!(x),
        FieldValue::I8(x) => json!(x),
        FieldValue::I16(x) => json!(x),
        FieldValue::I32(x) => json!(x),
        FieldValue::F64(x) => json!(x),
    }
}

/// Checks only the tag; a capture's timestamps are not judged against now.
fn signature_text(frame: &Frame, key: Option<&SecretKey>) -> &'static str {
    match (frame, key) {
        (Frame::V2(f), Some(k)) => match f.signature {
            Some(sig) if compute_sig48(k, f, sig.link_id, sig.timestamp) == sig.sig48 => "SIG OK",
            Some(_) => "SIG BAD",
            None => "UNSIGNED",
        },
        (Frame::V2(f), None) if f.signature.is_some() => "NOT CHECKED",
        _ => "UNSIGNED",
    }
}

fn emit(index: usize, item: &Item, catalog: &Catalog, key: Option<&SecretKey>, machine: bool) {
    let mut obj = Map::new();
    let mut lines: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, text: String, v: Value| {
        lines.push((k.to_string(), text));
        obj.insert(k.to_string(), v);
    };
    put("frame", index.to_string(), json!(index));
    if let Some(t) = item.timestamp_us {
        put("timestamp_us", t.to_string(), json!(t));
    }
    if let Some(d) = item.direction {
        put(
            "direction",
            direction_name(d).into(),
            json!(direction_name(d)),
        );
    }
    match &item.parsed {
        Err(e) => put("error", e.clone(), json!(e)),
        Ok((frame, verdict)) => {
            let version = match frame {
                Frame::V1(_) => 1,
                Frame::V2(_) => 2,
            };
            put("version", version.to_string(), json!(version));
            put(
                "len",
                frame.payload().len().to_string(),
                json!(frame.payload().len()),
            );
            if let Frame::V2(f) = frame {
                put(
                    "incompat_flags",
                    format!("0x{:02x}", f.incompat_flags),
                    json!(f.incompat_flags),
                );
                put(
                    "compat_flags",
                    format!("0x{:02x}", f.compat_flags),
                    json!(f.compat_flags),
                );
            }
            put("seq", frame.seq().to_string(), json!(frame.seq()));
            put("sysid", frame.sysid().to_string(), json!(frame.sysid()));
            put("compid", frame.compid().to_string(), json!(frame.compid()));
            put("msgid", frame.msgid().to_string(), json!(frame.msgid()));
            if let Some(desc) = catalog.get(frame.msgid()) {
                put("name", desc.name.clone(), json!(desc.name));
                match desc.decode_payload(frame.payload()) {
                    Ok(values) => {
                        let mut fields = Map::new();
                        for (fd, v) in desc.fields.iter().zip(&values) {
                            lines.push((format!("field.{}", fd.name), v.to_string()));
                            fields.insert(fd.name.clone(), field_json(v));
                        }
                        obj.insert("fields".into(), Value::Object(fields));
                    }
                    Err(e) => {
                        lines.push(("decode_error".into(), e.to_string()));
                        obj.insert("decode_error".into(), json!(e.to_string()));
                    }
                }
            }
            let crc = format!("0x{:04x}", frame.crc());
            lines.push(("crc".into(), crc.clone()));
            obj.insert("crc".into(), json!(crc));
            lines.push(("crc_verdict".into(), crc_text(*verdict).into()));
            obj.insert("crc_verdict".into(), json!(crc_text(*verdict)));
            if let Some(sig) = frame.signature() {
                lines.push(("signature.link_id".into(), sig.link_id.to_string()));
                lines.push(("signature.timestamp".into(), sig.timestamp.to_string()));
                obj.insert(
                    "signature".into(),
                    json!({"link_id": sig.link_id, "timestamp": sig.timestamp, "sig48": hex::encode(sig.sig48)}),
                );
            }
            let sv = signature_text(frame, key);
            lines.push(("signature_verdict".into(), sv.into()));
            obj.insert("signature_verdict".into(), json!(sv));
        }
    }
    if machine {
        out!("{}", Value::Object(obj));
    } else {
        if index > 0 {
            out!();
        }
        for (k, v) in lines {
            out!("{k}: {v}");
        }
    }
}

pub fn mavdump(args: &MavdumpArgs) -> CliResult {
    let catalog = Catalog::standard();
    let key = args.key.load()?;
    let input = args.input.clone().unwrap_or_default();
    let as_file = !args.hex
        && (args.capture || (!input.is_empty() && input != "-" && Path::new(&input).is_file()));
    let items = if as_file {
        from_capture(&PathBuf::from(&input), catalog)?
    } else if input == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(runtime)?;
        from_hex(&hex_input(&text)?, catalog)
    } else {
        from_hex(&hex_input(&input)?, catalog)
    };
    for (i, item) in items.iter().enumerate() {
        emit(i, item, catalog, key.as_ref(), args.machine);
    }
    Ok(())
}
