//! `export-space` and its read-only HTTP surface.

use std::io::Write;

use ideofactor::export::{to_json, Space};
use ideofactor::recommender::{RecommendOptions, ToleranceBox};
use ideofactor::Error;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::error::CliError;
use crate::views::load_space;
use crate::ExportSpaceArgs;

pub fn cmd_export_space(args: &ExportSpaceArgs) -> Result<(), CliError> {
    let space = load_space(&args.source)?;
    let json = to_json(&space);
    match &args.out {
        Some(p) => ideofactor::io::write_text(p, &json).map_err(CliError::from)?,
        None if args.serve.is_none() => print!("{json}"),
        None => {}
    }
    if let Some(port) = args.serve {
        serve(&space, &json, port)?;
    }
    Ok(())
}

fn serve(space: &Space, space_json: &str, port: u16) -> Result<(), CliError> {
    let server = Server::http(("127.0.0.1", port)).map_err(|e| CliError::Usage(format!("cannot bind port {port}: {e}")))?;
    let addr = server
        .server_addr()
        .to_ip()
        .map(|a| a.to_string())
        .unwrap_or_default();
    eprintln!("listening on http://{addr}");
    let _ = std::io::stderr().flush();
    for request in server.incoming_requests() {
        let (status, body) = handle(space, space_json, &request);
        let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
        let response = Response::from_string(body).with_status_code(status).with_header(header);
        if let Err(e) = request.respond(response) {
            log::warn!("failed to send response: {e}");
        }
    }
    Ok(())
}

fn error_body(message: &str) -> String {
    to_json(&serde_json::json!({ "error": message }))
}

fn handle(space: &Space, space_json: &str, request: &Request) -> (u16, String) {
    if *request.method() != Method::Get {
        return (405, error_body("only GET is supported"));
    }
    let url = request.url();
    let (path, query) = url.split_once('?').unwrap_or((url, ""));
    match path {
        "/space" => (200, space_json.to_string()),
        "/recommend" => match recommend(space, query) {
            Ok(body) => (200, body),
            Err((status, message)) => (status, error_body(&message)),
        },
        _ => (404, error_body("unknown endpoint")),
    }
}

fn recommend(space: &Space, query: &str) -> Result<String, (u16, String)> {
    let mut user = None;
    let mut theta = None;
    let mut delta = None;
    let mut options = RecommendOptions::default();
    let bad = |m: String| (400, m);
    for (key, value) in form_urlencoded::parse(query.as_bytes()) {
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("{key}: `{v}` is not a number")));
        let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("{key}: `{v}` is not a non-negative integer")));
        match key.as_ref() {
            "user" => user = Some(value.into_owned()),
            "theta" => theta = Some(num(&value)?),
            "delta" => delta = Some(num(&value)?),
            "count" => options.count = int(&value)? as usize,
            "seed" => options.seed = int(&value)?,
            "exclude_consumed" => {
                options.exclude_consumed = value
                    .parse()
                    .map_err(|_| bad(format!("exclude_consumed: `{value}` is not true/false")))?
            }
            other => return Err(bad(format!("unknown parameter `{other}`"))),
        }
    }
    let user = user.ok_or_else(|| bad("missing `user`".into()))?;
    let tolerance = ToleranceBox::new(
        theta.ok_or_else(|| bad("missing `theta`".into()))?,
        delta.ok_or_else(|| bad("missing `delta`".into()))?,
    )
    .map_err(|e| bad(e.to_string()))?;
    match space.recommend(&user, tolerance, &options) {
        Ok(r) => Ok(to_json(&r)),
        Err(e @ Error::UnknownId(_)) => Err((404, e.to_string())),
        Err(e) => Err(bad(e.to_string())),
    }
}
