mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Stdio};

use common::*;
use tempfile::tempdir;

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start(args: &[&str]) -> (Server, String) {
    let mut child = bin().args(args).stderr(Stdio::piped()).stdout(Stdio::null()).spawn().unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server printed its address").unwrap();
        if let Some(rest) = line.strip_prefix("listening on http://") {
            break rest.to_string();
        }
    };
    (Server(child), addr)
}

fn request(addr: &str, method: &str, path: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(stream, "{method} {path} HTTP/1.0\r\nHost: {addr}\r\n\r\n").unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let status: u16 = raw.split_whitespace().nth(1).unwrap().parse().unwrap();
    let body = raw.split_once("\r\n\r\n").map(|x| x.1.to_string()).unwrap_or_default();
    (status, body)
}

#[test]
fn http_surface_matches_cli_output() {
    let t = tempdir().unwrap();
    let data = generate(t.path(), 12, &["--n-users", "50", "--m-sources", "20"]);
    let run_dir = t.path().join("run");
    fit(&data, &run_dir, &[]);
    let space = t.path().join("space.json");
    let engagement = s(&data.join("engagement.tsv"));
    let truth = s(&data.join("users_truth.csv"));
    run_ok(&[
        "export-space", "--run", &s(&run_dir), "--engagement", &engagement, "--truth", &truth, "--out", &s(&space),
    ]);
    let (_server, addr) = start(&[
        "export-space", "--run", &s(&run_dir), "--engagement", &engagement, "--truth", &truth, "--serve", "0",
    ]);

    let (status, body) = request(&addr, "GET", "/space");
    assert_eq!(status, 200);
    assert_eq!(body, std::fs::read_to_string(&space).unwrap());
    let sp: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(sp["users"].as_array().unwrap().len(), 50);
    assert_eq!(sp["sources"].as_array().unwrap().len(), 20);
    assert!(!sp["edges"].as_array().unwrap().is_empty());

    let cli = run_ok(&[
        "recommend", "--space", &s(&space), "--user", "u00002", "--theta", "0.3", "--delta", "0.2", "--count", "4",
        "--seed", "9",
    ]);
    let (status, body) = request(&addr, "GET", "/recommend?user=u00002&theta=0.3&delta=0.2&count=4&seed=9");
    assert_eq!(status, 200);
    assert_eq!(body.as_bytes(), &cli.stdout[..]);

    let (status, _) = request(&addr, "GET", "/recommend?user=ghost&theta=0.3&delta=0.2");
    assert_eq!(status, 404);
    let (status, body) = request(&addr, "GET", "/recommend?user=u00002&theta=abc&delta=0.2");
    assert_eq!(status, 400);
    assert!(body.contains("error"));
    let (status, _) = request(&addr, "GET", "/recommend?user=u00002&delta=0.2");
    assert_eq!(status, 400);
    let (status, _) = request(&addr, "POST", "/space");
    assert_eq!(status, 405);
    let (status, _) = request(&addr, "GET", "/factors");
    assert_eq!(status, 404);

    // serving is read-only: the space is unchanged afterwards
    let (_, again) = request(&addr, "GET", "/space");
    assert_eq!(again, std::fs::read_to_string(&space).unwrap());
}
