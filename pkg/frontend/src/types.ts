/** Wire types for the courserec JSON API (snake_case, as served). */

export interface FilterBody {
  offered: boolean;
  not_taken: boolean;
  no_credit_restriction: boolean;
  department: string | null;
  requirement_list: string | null;
  open_seats: boolean;
  registrar_list: boolean;
}

export interface RecommendRequest {
  student_id?: string;
  history?: string[][];
  major?: string;
  use_collaborative: boolean;
  interest?: string;
  disinterest?: string;
  collaborative_weight: number;
  filters: FilterBody;
  k: number;
}

export interface CourseResult {
  rank: number;
  subject: string;
  course_number: string;
  title: string;
  description: string;
  score: number;
  components: {
    interest: number;
    disinterest: number;
    collaborative: number;
  };
}

export interface RecommendResponse {
  model_version: string;
  applied_filters: FilterBody;
  results: CourseResult[];
}

export interface CatalogResponse {
  model_version: string;
  majors: string[];
  subjects: string[];
  departments: string[];
  requirement_lists: string[];
  courses: { subject: string; course_number: string; title: string }[];
}

export interface KeywordSemester {
  label: string;
  keywords: string[];
}

export interface KeywordsResponse {
  model_version: string;
  student_id: string;
  semesters: KeywordSemester[];
}

export interface SimilarResponse {
  model_version: string;
  course: string;
  neighbors: {
    subject: string;
    course_number: string;
    title: string;
    similarity: number;
  }[];
}

export interface ProjectionPoint {
  student_id: string;
  major: string;
  x: number;
  y: number;
}

export interface ProjectionResponse {
  model_version: string;
  method: string;
  points: ProjectionPoint[];
}
