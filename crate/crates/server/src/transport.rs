//! Per-connection I/O. A connection whose first bytes are `GET ` is a
//! WebSocket upgrade; anything else is newline-delimited JSON.

use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio::sync::mpsc;
use tokio_tungstenite::tungstenite::Message;
use tokio_util::codec::{FramedRead, FramedWrite, LinesCodec, LinesCodecError};

use crate::protocol::{ClientMessage, ServerMessage};

/// Longest accepted message, in bytes.
pub const MAX_MESSAGE: usize = 64 * 1024;

pub type ConnId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framing {
    Lines,
    WebSocket,
}

#[derive(Debug)]
pub enum Event {
    Opened { id: ConnId, framing: Framing, outbound: mpsc::UnboundedSender<ServerMessage> },
    Message { id: ConnId, message: Result<ClientMessage, String> },
    Closed { id: ConnId },
}

async fn detect(stream: &TcpStream) -> std::io::Result<Framing> {
    let mut buf = [0u8; 4];
    loop {
        let n = stream.peek(&mut buf).await?;
        if n == 0 || buf[..n] != b"GET "[..n] {
            return Ok(Framing::Lines);
        }
        if n == 4 {
            return Ok(Framing::WebSocket);
        }
        tokio::time::sleep(std::time::Duration::from_millis(1)).await;
    }
}

/// Serves one accepted connection until either side closes it.
pub async fn handle(stream: TcpStream, id: ConnId, events: mpsc::UnboundedSender<Event>) {
    let framing = match detect(&stream).await {
        Ok(f) => f,
        Err(e) => {
            tracing::debug!(id, "connection failed before the first message: {e}");
            return;
        }
    };
    let (tx, rx) = mpsc::unbounded_channel();
    match framing {
        Framing::Lines => {
            if events.send(Event::Opened { id, framing, outbound: tx }).is_ok() {
                serve_lines(stream, id, &events, rx).await;
            }
        }
        Framing::WebSocket => match tokio_tungstenite::accept_async(stream).await {
            Ok(ws) => {
                if events.send(Event::Opened { id, framing, outbound: tx }).is_ok() {
                    serve_ws(ws, id, &events, rx).await;
                }
            }
            Err(e) => {
                tracing::debug!(id, "WebSocket handshake failed: {e}");
                return;
            }
        },
    }
    let _ = events.send(Event::Closed { id });
}

async fn serve_lines(
    stream: TcpStream,
    id: ConnId,
    events: &mpsc::UnboundedSender<Event>,
    mut outbound: mpsc::UnboundedReceiver<ServerMessage>,
) {
    let (read, write) = stream.into_split();
    let mut lines = FramedRead::new(read, LinesCodec::new_with_max_length(MAX_MESSAGE));
    let mut sink = FramedWrite::new(write, LinesCodec::new());
    loop {
        tokio::select! {
            // Outbound first, so queued messages go out before a shutdown.
            biased;
            msg = outbound.recv() => match msg {
                Some(m) => {
                    if sink.send(m.to_json()).await.is_err() {
                        return;
                    }
                }
                None => return,
            },
            line = lines.next() => {
                let message = match line {
                    Some(Ok(l)) if l.trim().is_empty() => continue,
                    Some(Ok(l)) => ClientMessage::parse(&l),
                    Some(Err(LinesCodecError::MaxLineLengthExceeded)) => {
                        Err(format!("message longer than {MAX_MESSAGE} bytes"))
                    }
                    Some(Err(_)) | None => return,
                };
                if events.send(Event::Message { id, message }).is_err() {
                    return;
                }
            }
            _ = events.closed() => return,
        }
    }
}

async fn serve_ws(
    ws: tokio_tungstenite::WebSocketStream<TcpStream>,
    id: ConnId,
    events: &mpsc::UnboundedSender<Event>,
    mut outbound: mpsc::UnboundedReceiver<ServerMessage>,
) {
    let (mut sink, mut frames) = ws.split();
    loop {
        tokio::select! {
            biased;
            msg = outbound.recv() => match msg {
                Some(m) => {
                    if sink.send(Message::text(m.to_json())).await.is_err() {
                        return;
                    }
                }
                None => {
                    let _ = sink.send(Message::Close(None)).await;
                    return;
                }
            },
            frame = frames.next() => {
                let message = match frame {
                    Some(Ok(Message::Text(t))) if t.len() > MAX_MESSAGE => {
                        Err(format!("message longer than {MAX_MESSAGE} bytes"))
                    }
                    Some(Ok(Message::Text(t))) => ClientMessage::parse(t.as_str()),
                    Some(Ok(Message::Binary(_))) => Err("binary frames are not supported".to_string()),
                    Some(Ok(Message::Ping(_) | Message::Pong(_) | Message::Frame(_))) => continue,
                    Some(Ok(Message::Close(_)) | Err(_)) | None => return,
                };
                if events.send(Event::Message { id, message }).is_err() {
                    return;
                }
            }
            _ = events.closed() => return,
        }
    }
}
