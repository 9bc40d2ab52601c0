//! Sampler backed by an OpenAI-compatible `/v1/chat/completions` endpoint,
//! typically a locally hosted model.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::sampler::{SampleRequest, SamplerError, SemanticSampler};
use crate::error::{CoreError, Result};

/// Environment variable holding a bearer token, if the endpoint wants one.
pub const API_KEY_ENV: &str = "ADAPTFUSE_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpChatConfig {
    pub base_url: String,
    pub model: String,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    /// Extra attempts after the first one fails.
    pub retries: u32,
    pub retry_backoff_ms: u64,
    /// Singular noun used in the prompt, e.g. "flight".
    pub item_noun: String,
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for HttpChatConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000".into(),
            model: "local-model".into(),
            max_tokens: 512,
            timeout_secs: 60.0,
            retries: 2,
            retry_backoff_ms: 250,
            item_noun: "item".into(),
            api_key: None,
        }
    }
}

impl HttpChatConfig {
    pub fn with_env_api_key(mut self) -> Self {
        self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: Option<String>,
}

/// Renders the conversation so far plus the current options as chat messages.
pub fn build_messages(item_noun: &str, request: &SampleRequest<'_>) -> Vec<ChatMessage> {
    let noun = item_noun.to_lowercase();
    let mut prompt = format!(
        "Help me select the best {noun}s for my trips. I have specific preferences for what I like and \
         dislike in a {noun}, and these preferences remain the same. You need to figure out my preferences \
         and select the best {noun}s for me. Use your best judgment if you are unsure. Do not say you need \
         more information.\n"
    );
    let capitalized = capitalize(&noun);
    for (r, round) in request.history.rounds().iter().enumerate() {
        prompt.push_str(&format!("\nRound {}: {capitalized} Options:\n", r + 1));
        for text in round.options.raw_texts() {
            prompt.push_str(text);
            prompt.push('\n');
        }
        prompt.push_str(&format!(
            "User Feedback: I prefer {capitalized} {}.\n",
            round.choice + 1
        ));
    }
    prompt.push_str(&format!(
        "\nRound {}: {capitalized} Options:\n",
        request.history.len() + 1
    ));
    for text in request.options.raw_texts() {
        prompt.push_str(text);
        prompt.push('\n');
    }
    prompt.push_str(&format!(
        "\nHint: {}.\nThink briefly, then end your reply with exactly one line of the form\n\
         ANSWER: <{capitalized} number> CONFIDENCE: <number between 0 and 1>\n",
        request.hint
    ));
    vec![ChatMessage {
        role: "user".into(),
        content: prompt,
    }]
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

#[derive(Debug, Clone)]
pub struct HttpChatSampler {
    config: HttpChatConfig,
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpChatSampler {
    pub fn new(config: HttpChatConfig) -> Result<Self> {
        if !(config.base_url.starts_with("http://") || config.base_url.starts_with("https://")) {
            return Err(CoreError::InvalidConfig {
                field: "base_url",
                reason: format!("expected an http(s) URL, got {:?}", config.base_url),
            });
        }
        if !(config.timeout_secs.is_finite() && config.timeout_secs > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "timeout_secs",
                reason: "must be positive".into(),
            });
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let endpoint = format!("{}/v1/chat/completions", config.base_url.trim_end_matches('/'));
        Ok(Self {
            config,
            endpoint,
            agent,
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn call_once(&self, body: &ChatRequest<'_>) -> std::result::Result<String, SamplerError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| SamplerError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(SamplerError::Status(status));
        }
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| SamplerError::Body(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| SamplerError::Body("no choices[0].message.content".into()))
    }
}

fn retryable(err: &SamplerError) -> bool {
    match err {
        SamplerError::Transport(_) => true,
        SamplerError::Status(code) => *code == 429 || *code >= 500,
        SamplerError::Body(_) => false,
    }
}

impl SemanticSampler for HttpChatSampler {
    fn complete(&mut self, request: &SampleRequest<'_>) -> std::result::Result<String, SamplerError> {
        let messages = build_messages(&self.config.item_noun, request);
        let body = ChatRequest {
            model: &self.config.model,
            messages: &messages,
            temperature: request.temperature,
            max_tokens: self.config.max_tokens,
        };
        let mut attempt = 0;
        loop {
            match self.call_once(&body) {
                Ok(text) => return Ok(text),
                Err(err) if attempt < self.config.retries && retryable(&err) => {
                    attempt += 1;
                    log::debug!("chat completion attempt {attempt} failed: {err}; retrying");
                    std::thread::sleep(Duration::from_millis(self.config.retry_backoff_ms * attempt as u64));
                }
                Err(err) => return Err(err),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{FeatureVector, InteractionHistory, OptionSet};

    #[test]
    fn prompt_contains_history_options_hint_and_answer_format() {
        let fv = |v: f64| FeatureVector::new(vec![v]).unwrap();
        let x = OptionSet::new(
            vec![fv(0.1), fv(0.9)],
            vec!["Flight 1: Price: $190".into(), "Flight 2: Price: $910".into()],
        )
        .unwrap();
        let mut history = InteractionHistory::new();
        history.push(x.clone(), 1).unwrap();
        let request = SampleRequest {
            options: &x,
            history: &history,
            temperature: 0.7,
            hint: "compare prices first",
            sample_index: 1,
        };
        let msgs = build_messages("flight", &request);
        assert_eq!(msgs.len(), 1);
        let text = &msgs[0].content;
        assert!(text.starts_with("Help me select the best flights"));
        assert!(text.contains("Round 1: Flight Options:"));
        assert!(text.contains("User Feedback: I prefer Flight 2."));
        assert!(text.contains("Round 2: Flight Options:"));
        assert!(text.contains("Hint: compare prices first."));
        assert!(text.contains("ANSWER: <Flight number> CONFIDENCE:"));
    }

    #[test]
    fn rejects_bad_urls() {
        let cfg = HttpChatConfig {
            base_url: "localhost:8000".into(),
            ..Default::default()
        };
        assert!(HttpChatSampler::new(cfg).is_err());
        let ok = HttpChatSampler::new(HttpChatConfig {
            base_url: "http://127.0.0.1:9/".into(),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(ok.endpoint(), "http://127.0.0.1:9/v1/chat/completions");
    }
}
