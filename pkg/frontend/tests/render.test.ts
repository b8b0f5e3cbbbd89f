import { describe, expect, it } from "vitest";
import {
  displayedOrder,
  renderError,
  renderKeywordPanel,
  renderResults,
  renderScatter,
  renderSelect,
} from "../src/render.js";
import type { CourseResult } from "../src/types.js";

function result(subject: string, num: string, rank: number): CourseResult {
  return {
    rank,
    subject,
    course_number: num,
    title: `${subject} ${num} title`,
    description: "",
    score: 1 / rank,
    components: { interest: 0, disinterest: 0, collaborative: 0 },
  };
}

describe("renderResults", () => {
  it("displays rows in exactly the order given, never re-sorting", () => {
    const tbody = document.createElement("tbody");
    // deliberately non-alphabetical input order
    const results = [
      result("ZOOL", "500", 1),
      result("ART", "12", 2),
      result("MATH", "101", 3),
    ];
    renderResults(tbody, results);
    expect(displayedOrder(tbody)).toEqual(["ZOOL 500", "ART 12", "MATH 101"]);
  });

  it("replaces previous rows on re-render", () => {
    const tbody = document.createElement("tbody");
    renderResults(tbody, [result("A", "1", 1), result("B", "2", 2)]);
    renderResults(tbody, [result("C", "3", 1)]);
    expect(displayedOrder(tbody)).toEqual(["C 3"]);
  });
});

describe("renderKeywordPanel", () => {
  it("renders one chip per keyword per semester", () => {
    const panel = document.createElement("div");
    renderKeywordPanel(panel, [
      { label: "start", keywords: ["alpha", "beta", "gamma", "delta", "eps"] },
      { label: "Fall 2012", keywords: ["one", "two", "three", "four", "five"] },
    ]);
    const sections = panel.querySelectorAll(".semester");
    expect(sections).toHaveLength(2);
    for (const section of sections) {
      expect(section.querySelectorAll(".chip")).toHaveLength(5);
    }
    expect(sections[0]?.querySelector("h4")?.textContent).toBe("start");
  });
});

describe("renderSelect", () => {
  it("keeps a blank placeholder ahead of the options", () => {
    const select = document.createElement("select");
    renderSelect(select, ["SUBJ0", "SUBJ1"], "no interest");
    const opts = Array.from(select.options).map((o) => o.value);
    expect(opts).toEqual(["", "SUBJ0", "SUBJ1"]);
    expect(select.options[0]?.textContent).toBe("no interest");
  });
});

describe("renderError", () => {
  it("shows and clears the message", () => {
    const el = document.createElement("div");
    renderError(el, "service unreachable");
    expect(el.textContent).toBe("service unreachable");
    expect(el.classList.contains("visible")).toBe(true);
    renderError(el, null);
    expect(el.textContent).toBe("");
    expect(el.classList.contains("visible")).toBe(false);
  });
});

describe("renderScatter", () => {
  it("draws one point per student, colored consistently by major", () => {
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    renderScatter(svg as SVGSVGElement, [
      { student_id: "S1", major: "MajorA", x: 0, y: 0 },
      { student_id: "S2", major: "MajorB", x: 1, y: 1 },
      { student_id: "S3", major: "MajorA", x: 2, y: 0.5 },
    ]);
    const circles = Array.from(svg.querySelectorAll("circle"));
    expect(circles).toHaveLength(3);
    expect(circles[0]?.getAttribute("fill")).toBe(circles[2]?.getAttribute("fill"));
    expect(circles[0]?.getAttribute("fill")).not.toBe(circles[1]?.getAttribute("fill"));
  });
});
