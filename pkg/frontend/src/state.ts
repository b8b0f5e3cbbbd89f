/** Options panel state and its mapping to/from the wire format.
 *
 * The state mirrors the query the service understands exactly, so
 * `toRequest` / `filtersFromApplied` round-trip without loss: building a
 * request from the state and reading back the echoed `applied_filters`
 * reproduces the same state.
 */

import type { FilterBody, RecommendRequest } from "./types.js";

export interface FilterState {
  offered: boolean;
  notTaken: boolean;
  noCreditRestriction: boolean;
  department: string | null;
  requirementList: string | null;
  openSeats: boolean;
  registrarList: boolean;
}

export interface OptionsState {
  studentId: string | null;
  major: string | null;
  useCollaborative: boolean;
  collaborativeWeight: number;
  interest: string | null;
  disinterest: string | null;
  filters: FilterState;
  k: number;
}

export function defaultState(): OptionsState {
  return {
    studentId: null,
    major: null,
    useCollaborative: false,
    collaborativeWeight: 1.0,
    interest: null,
    disinterest: null,
    filters: {
      offered: false,
      notTaken: false,
      noCreditRestriction: false,
      department: null,
      requirementList: null,
      openSeats: false,
      registrarList: false,
    },
    k: 10,
  };
}

export function filtersToBody(f: FilterState): FilterBody {
  return {
    offered: f.offered,
    not_taken: f.notTaken,
    no_credit_restriction: f.noCreditRestriction,
    department: f.department,
    requirement_list: f.requirementList,
    open_seats: f.openSeats,
    registrar_list: f.registrarList,
  };
}

export function filtersFromApplied(body: FilterBody): FilterState {
  return {
    offered: body.offered,
    notTaken: body.not_taken,
    noCreditRestriction: body.no_credit_restriction,
    department: body.department,
    requirementList: body.requirement_list,
    openSeats: body.open_seats,
    registrarList: body.registrar_list,
  };
}

export function toRequest(s: OptionsState): RecommendRequest {
  const req: RecommendRequest = {
    use_collaborative: s.useCollaborative,
    collaborative_weight: s.collaborativeWeight,
    filters: filtersToBody(s.filters),
    k: s.k,
  };
  if (s.studentId !== null) req.student_id = s.studentId;
  if (s.major !== null) req.major = s.major;
  if (s.interest !== null) req.interest = s.interest;
  if (s.disinterest !== null) req.disinterest = s.disinterest;
  return req;
}

/** True when the request carries no sort criterion at all, in which case
 * the service returns the catalog's alphabetical order. */
export function hasSortCriteria(s: OptionsState): boolean {
  return s.useCollaborative || s.interest !== null || s.disinterest !== null;
}

/** Swap interest and disinterest; with no collaborative term the service
 * reverses the preference ordering exactly. */
export function swapPreferences(s: OptionsState): OptionsState {
  return { ...s, interest: s.disinterest, disinterest: s.interest };
}
