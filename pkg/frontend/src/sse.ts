/** Incremental parser for a text/event-stream body.
 *
 * Works on arbitrary chunk boundaries (a network read may split an event
 * mid-line), so it can sit behind either fetch streaming or EventSource
 * polyfills. Only the fields the service emits are handled: `event:` and
 * `data:`; comment lines (leading colon) are ignored.
 */

export interface SseEvent {
  event: string; // "message" unless the stream names one
  data: string;
}

export class SseParser {
  private buffer = "";
  private eventName = "";
  private dataLines: string[] = [];

  /** Feed a chunk of the response body; returns completed events. */
  feed(chunk: string): SseEvent[] {
    this.buffer += chunk;
    const events: SseEvent[] = [];
    for (;;) {
      const nl = this.buffer.indexOf("\n");
      if (nl < 0) break;
      let line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);
      if (line === "") {
        // blank line terminates an event
        if (this.dataLines.length > 0 || this.eventName !== "") {
          events.push({
            event: this.eventName || "message",
            data: this.dataLines.join("\n"),
          });
        }
        this.eventName = "";
        this.dataLines = [];
      } else if (line.startsWith(":")) {
        // comment / keep-alive
      } else if (line.startsWith("event:")) {
        this.eventName = line.slice("event:".length).trimStart();
      } else if (line.startsWith("data:")) {
        this.dataLines.push(line.slice("data:".length).trimStart());
      }
    }
    return events;
  }
}
