/** Document Q&A chat view-model: message history, incremental answer display,
 * fallback-source badge, and click-to-scroll citation targets. */

import { ApiClient } from "./api.js";
import type { Answer, AnswerSource } from "./types.js";

export interface ChatMessage {
  role: "teacher" | "assistant";
  text: string;
  /** Set once the answer is complete. */
  source?: AnswerSource;
  citations: [string, number][];
  pending: boolean;
}

export class DocumentChatModel {
  messages: ChatMessage[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly fileId: string,
  ) {}

  /** Ask a question; the pending assistant message fills in as chunks land. */
  async ask(question: string): Promise<Answer> {
    this.messages.push({ role: "teacher", text: question, citations: [], pending: false });
    const reply: ChatMessage = { role: "assistant", text: "", citations: [], pending: true };
    this.messages.push(reply);
    try {
      const answer = await this.api.askDocument(this.fileId, question);
      // Reveal progressively so a streaming transport can drive the same path.
      for (const chunk of chunked(answer.text, 64)) {
        this.appendChunk(chunk);
      }
      this.complete(answer);
      return answer;
    } catch (error) {
      reply.pending = false;
      reply.text = "(request failed)";
      throw error;
    }
  }

  appendChunk(chunk: string): void {
    const last = this.messages[this.messages.length - 1];
    if (last && last.role === "assistant" && last.pending) {
      last.text += chunk;
    }
  }

  complete(answer: Answer): void {
    const last = this.messages[this.messages.length - 1];
    if (last && last.role === "assistant") {
      last.text = answer.text;
      last.source = answer.source;
      last.citations = answer.cited_chunks;
      last.pending = false;
    }
  }

  /** Badge text for an answered message; fallback answers are flagged. */
  static badge(message: ChatMessage): string | null {
    if (message.source === "model_fallback") return "not grounded in document";
    if (message.source === "knowledge_base") return "from document";
    return null;
  }

  /** DOM ids the document view exposes for click-to-scroll. */
  static citationAnchor(citation: [string, number]): string {
    return `chunk-${citation[0]}-${citation[1]}`;
  }
}

function* chunked(text: string, size: number): Generator<string> {
  for (let i = 0; i < text.length; i += size) {
    yield text.slice(i, i + size);
  }
}
