import { describe, expect, it } from "vitest";

import { QUESTIONS, SurveyDraft } from "../src/survey.js";

describe("SurveyDraft", () => {
  it("is incomplete until every question has a rating", () => {
    const draft = new SurveyDraft(3);
    expect(draft.complete).toBe(false);
    draft.setRating(0, 5);
    draft.setRating(1, 4);
    expect(draft.complete).toBe(false);
    draft.setRating(2, 5);
    expect(draft.complete).toBe(true);
  });

  it("emits a survey_submit frame in question order", () => {
    const draft = new SurveyDraft(3);
    draft.setRating(2, 3);
    draft.setRating(0, 5);
    draft.setRating(1, 4);
    expect(draft.toFrame()).toEqual({ type: "survey_submit", ratings: [5, 4, 3] });
  });

  it("lets a participant revise an answer", () => {
    const draft = new SurveyDraft(1);
    draft.setRating(0, 2);
    draft.setRating(0, 4);
    expect(draft.toFrame().ratings).toEqual([4]);
  });

  it("refuses to submit early", () => {
    const draft = new SurveyDraft(2);
    draft.setRating(0, 5);
    expect(() => draft.toFrame()).toThrow(/not fully answered/);
  });

  it.each([0, 6, 2.5, -1])("rejects rating %s", (rating) => {
    const draft = new SurveyDraft(1);
    expect(() => draft.setRating(0, rating)).toThrow(/1\.\.5/);
  });

  it("rejects out-of-range questions and empty surveys", () => {
    const draft = new SurveyDraft(2);
    expect(() => draft.setRating(2, 3)).toThrow(/no question/);
    expect(() => draft.setRating(-1, 3)).toThrow(/no question/);
    expect(() => new SurveyDraft(0)).toThrow(/at least one/);
  });

  it("defaults to the stock question list", () => {
    const draft = new SurveyDraft();
    QUESTIONS.forEach((_, index) => draft.setRating(index, 5));
    expect(draft.toFrame().ratings).toHaveLength(QUESTIONS.length);
  });
});
