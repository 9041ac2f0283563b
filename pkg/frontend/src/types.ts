/** Wire types mirroring the service's JSON responses verbatim. */

export type Status = 'present' | 'absent' | 'unknown';

export interface FeatureMeta {
  id: string;
  name: string;
  synonyms: string[];
}

export interface HypothesisMeta {
  id: string;
  name: string;
  features: string[];
}

export interface CodexMeta {
  codex_version: string;
  domain_label: string;
  n: number;
  m: number;
  features: FeatureMeta[];
  hypotheses: HypothesisMeta[];
  policy: Record<string, unknown>;
}

export interface Contribution {
  feature: string;
  term: 'support' | 'missing' | 'unexpected';
  delta: number;
}

export interface DifferentialEntry {
  hypothesis: string;
  raw_score: number;
  confidence: number;
  contributions: Contribution[];
}

export interface Differential {
  codex_version: string;
  policy: Record<string, unknown>;
  entries: DifferentialEntry[];
}

export interface Explanation {
  hypothesis: string;
  rank: number;
  raw_score: number;
  confidence: number;
  contributions: Contribution[];
  text: string;
}

export interface MentionWire {
  surface: string;
  start: number;
  end: number;
  polarity: 'affirmed' | 'negated';
}

export interface MatchWire {
  matched: boolean;
  score: number | null;
  feature: string | null;
  method: string | null;
}

export interface Proposal {
  mention: MentionWire;
  match: MatchWire;
  suggested_status: Status | null;
}

export interface SessionInfo {
  id: string;
  codex_version: string;
  created_at: string;
}
