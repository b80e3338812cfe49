//! Starts the HTTP API on an ephemeral port, asks it for one prediction over a
//! raw TCP connection, and shuts down.

use std::sync::Arc;

use neff::api::{router, ServeOptions};
use neff::pipeline::{fit_dataset, FitSettings};
use neff::{CovariateSpec, Dataset, DesignSpec, Family, IrlsOptions};
use tokio::io::{AsyncReadExt, AsyncWriteExt};

#[tokio::main]
async fn main() -> neff::Result<()> {
    let data = Dataset::from_columns(vec![
        ("x", vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
        ("y", vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0]),
    ])?;
    let settings = FitSettings {
        name: "demo".into(),
        family: Family::Binomial,
        outcome: "y".into(),
        thresholds: vec![30.0],
        irls: IrlsOptions::default(),
    };
    let model = fit_dataset(&data, DesignSpec::new(vec![CovariateSpec::binary("x")])?, &settings)?;

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .map_err(|e| neff::Error::io("127.0.0.1:0", e))?;
    let addr = listener.local_addr().map_err(|e| neff::Error::io("socket", e))?;
    println!("listening on http://{addr}");
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let app = router(Arc::new(model), &ServeOptions::default());
    let server = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await
    });

    let body = r#"{"covariates": {"x": 1}}"#;
    let request = format!(
        "POST /api/v1/predict HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\n\
         Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    let mut conn = tokio::net::TcpStream::connect(addr)
        .await
        .map_err(|e| neff::Error::io("connect", e))?;
    conn.write_all(request.as_bytes())
        .await
        .map_err(|e| neff::Error::io("write", e))?;
    let mut response = String::new();
    conn.read_to_string(&mut response)
        .await
        .map_err(|e| neff::Error::io("read", e))?;
    println!("{}", response.split("\r\n\r\n").nth(1).unwrap_or_default());

    let _ = stop.send(());
    let _ = server.await;
    Ok(())
}
