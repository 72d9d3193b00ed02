//! Minimal stderr logger gated by `TENSORJENN_LOG` in {error, info, debug}.

use std::sync::OnceLock;

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Level {
    Error = 0,
    Info = 1,
    Debug = 2,
}

fn level() -> Level {
    static LEVEL: OnceLock<Level> = OnceLock::new();
    *LEVEL.get_or_init(|| match std::env::var("TENSORJENN_LOG").as_deref() {
        Ok("debug") => Level::Debug,
        Ok("info") => Level::Info,
        _ => Level::Error,
    })
}

pub fn error(msg: &str) {
    eprintln!("error: {msg}");
}

pub fn info(msg: &str) {
    if level() >= Level::Info {
        eprintln!("info: {msg}");
    }
}

#[allow(dead_code)]
pub fn debug(msg: &str) {
    if level() >= Level::Debug {
        eprintln!("debug: {msg}");
    }
}
