// Wire shapes of the annotation service API, kept structurally identical to
// the server's JSON responses so no mapping layer is needed.

export interface TripleView {
  id: string;
  head: string;
  relation_label: string;
  tail: string;
}

export interface TaskPayload {
  completed: boolean;
  triple?: TripleView;
  relation_description?: string | null;
  entity_descriptions?: { head: string | null; tail: string | null };
  progress: { current: number; total: number };
}

export interface Verdict {
  accepted: boolean;
  failures: string[];
  record_id?: string;
}

export interface SessionInfo {
  session_id: string;
  annotator_id: string;
  size: number;
}

export type Overrides = { head?: string; tail?: string };

export interface ApiClient {
  createSession(annotatorId: string, n?: number, seed?: number): Promise<SessionInfo>;
  nextTask(sessionId: string): Promise<TaskPayload>;
  submit(
    sessionId: string,
    tripleId: string,
    text: string,
    overrides: Overrides | null
  ): Promise<Verdict>;
  report(sessionId: string, tripleId: string): Promise<{ reported: boolean }>;
}
