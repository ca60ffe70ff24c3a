// Splits essay text into plain and highlighted segments from the feedback
// span offsets, so weaknesses can be marked inline without re-tokenizing.

import type { FeedbackReport, SpanFix } from "./api.js";

export interface Segment {
  text: string;
  highlighted: boolean;
  replacement?: string;
}

export function collectSpans(report: FeedbackReport): SpanFix[] {
  const spans = report.items
    .filter((item) => item.polarity === "weakness")
    .flatMap((item) => item.spans);
  return [...spans].sort((a, b) => a.start - b.start);
}

export function segmentText(text: string, spans: SpanFix[]): Segment[] {
  const segments: Segment[] = [];
  let cursor = 0;
  for (const span of spans) {
    if (span.start < cursor || span.end > text.length) {
      continue; // stale span from an earlier draft; skip rather than misplace
    }
    if (span.start > cursor) {
      segments.push({ text: text.slice(cursor, span.start), highlighted: false });
    }
    segments.push({
      text: text.slice(span.start, span.end),
      highlighted: true,
      replacement: span.replacement,
    });
    cursor = span.end;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), highlighted: false });
  }
  return segments;
}
