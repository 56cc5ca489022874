// On-demand query keys. Alt+D pauses and requests an instant description of
// the current frame; Alt+Q pauses, captures a question (spoken upstream,
// typed fallback here), and asks it. Replies are spoken back; when the
// service is unavailable a fixed apology line plays instead.

import { ApiClient, ApiError } from "./api.js";

export const APOLOGY_LINE =
  "Sorry, a description is not available right now.";

export interface VideoSurface {
  currentTime(): number;
  pause(): void;
  /** Speak a reply: play its audio clip when present, else synthesize the text locally. */
  speak(text: string, audioUri: string | null): void;
}

export interface KeyStroke {
  altKey: boolean;
  key: string;
}

export class AdaptKeys {
  lastReply: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly assetId: string,
    private readonly video: VideoSurface,
    private readonly askQuestion: () => Promise<string | null>,
    private readonly loaded: () => boolean = () => true,
  ) {}

  /** Returns true when the stroke was handled. */
  async handleKey(stroke: KeyStroke): Promise<boolean> {
    if (!stroke.altKey) return false;
    const key = stroke.key.toLowerCase();
    if (key !== "d" && key !== "q") return false;
    if (!this.loaded()) return true; // no video: swallow the stroke, do nothing

    this.video.pause();
    const time = this.video.currentTime();
    try {
      if (key === "d") {
        const reply = await this.api.adaptDescribe(this.assetId, time);
        this.lastReply = reply.text;
        this.video.speak(reply.text, reply.audio_uri);
      } else {
        const question = await this.askQuestion();
        if (!question || !question.trim()) return true;
        const reply = await this.api.adaptQuestion(this.assetId, time, question);
        this.lastReply = reply.text;
        this.video.speak(reply.text, reply.audio_uri);
      }
    } catch (error) {
      if (error instanceof ApiError) {
        this.lastReply = APOLOGY_LINE;
        this.video.speak(APOLOGY_LINE, null);
      } else {
        throw error;
      }
    }
    return true;
  }
}
