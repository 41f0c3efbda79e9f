// Post-task satisfaction survey: fixed questions, ratings 1..5.

import { SurveySubmitFrame } from "./protocol.js";

export const QUESTIONS: readonly string[] = [
  "The task was easy to complete.",
  "I always knew what to do next.",
  "I would be happy using this in my own car.",
];

export const MIN_RATING = 1;
export const MAX_RATING = 5;

export class SurveyDraft {
  private readonly ratings: (number | null)[];

  constructor(questionCount: number = QUESTIONS.length) {
    if (questionCount < 1) {
      throw new Error("survey needs at least one question");
    }
    this.ratings = new Array(questionCount).fill(null);
  }

  setRating(question: number, rating: number): void {
    if (question < 0 || question >= this.ratings.length) {
      throw new Error(`no question ${question}`);
    }
    if (!Number.isInteger(rating) || rating < MIN_RATING || rating > MAX_RATING) {
      throw new Error(`rating must be an integer ${MIN_RATING}..${MAX_RATING}`);
    }
    this.ratings[question] = rating;
  }

  ratingFor(question: number): number | null {
    return this.ratings[question] ?? null;
  }

  get complete(): boolean {
    return this.ratings.every((r) => r !== null);
  }

  toFrame(): SurveySubmitFrame {
    if (!this.complete) {
      throw new Error("survey is not fully answered");
    }
    return { type: "survey_submit", ratings: this.ratings.map((r) => r as number) };
  }
}
