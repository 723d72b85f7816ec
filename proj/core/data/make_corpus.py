#!/usr/bin/env python3
"""Regenerates corpus.txt and the fixtures/ files. Output is committed; rerun only to change them."""
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(20240611)

companies = ["Acme Corp", "Borealis Group", "Cobalt Systems", "Delta Freight", "Everlane Foods",
             "Fjord Energy", "Granite Bank", "Helix Pharma", "Ionic Motors", "Juniper Retail"]
metrics = ["net income", "operating income", "total revenue", "gross margin", "operating margin",
           "free cash flow", "diluted earnings per share", "capital expenditure", "long-term debt",
           "research and development expense"]
verbs = ["rose", "fell", "increased", "decreased", "grew", "declined", "improved", "weakened"]
periods = ["the first quarter", "the second quarter", "the third quarter", "the fourth quarter",
           "fiscal 2021", "fiscal 2022", "fiscal 2023", "the prior year"]
reasons = ["higher demand in the core segment", "lower input costs", "a one-time impairment charge",
           "foreign exchange headwinds", "the acquisition of a regional competitor",
           "restructuring costs in the services segment", "stronger pricing across product lines",
           "weaker volumes in the international segment"]
fillers = ["In addition,", "However,", "As a result,", "Meanwhile,", "By contrast,", "Overall,"]


def amount():
    return f"{rng.uniform(1, 900):.1f}"


def sentence():
    c, m, v, p, r = (rng.choice(x) for x in (companies, metrics, verbs, periods, reasons))
    forms = [
        f"{c} reported that {m} {v} by {amount()} million in {p}, driven by {r}.",
        f"{m.capitalize()} {v} {rng.randint(1, 40)}% compared with {p} because of {r}.",
        f"{rng.choice(fillers)} {m} at {c} {v} to {amount()} million during {p}.",
        f"Management noted that {m} {v} in {p}; the change reflects {r}.",
        f"The board expects {m} to remain stable after {p} despite {r}.",
        f"What was the change in {m} for {c} between {p} and {rng.choice(periods)}?",
    ]
    return rng.choice(forms)


corpus = [" ".join(sentence() for _ in range(rng.randint(2, 5))) for _ in range(400)]
(HERE / "corpus.txt").write_text("\n".join(corpus) + "\n")

# Fixture: a deliberately redundant filing excerpt, a question prompt and a small table.
doc_lines = []
for q in ["first", "second", "third"]:
    for m in ["retail", "services"]:
        doc_lines.append(
            f"In the {q} quarter net income and operating margin and total revenue were reviewed for {m}; "
            f"net income {rng.choice(verbs)}, operating margin {rng.choice(verbs)} and total revenue "
            f"{rng.choice(verbs)}."
        )
(HERE / "fixtures" / "filing.txt").write_text("\n".join(doc_lines) + "\n")

prompt = (
    "You are a careful and very experienced financial analyst who has been asked to help with a "
    "question about a company filing. Please read the attached filing excerpt and the attached table "
    "very carefully before you begin, and then answer the question that follows at the end of this "
    "message. It is really important that you basically only use the information that is actually "
    "provided in the attached documents, and that you do not make any assumptions at all about "
    "information that is not provided anywhere in them. If the documents do not contain enough "
    "information to answer, then please just say so clearly instead of guessing. In your answer, "
    "please explain the reasoning step by step, quote the relevant figures from the table exactly as "
    "they appear, and then state the final numeric answer on its own line at the very end. Please keep "
    "the explanation short and to the point, because the answer will be read by a busy reviewer who "
    "really does not have a lot of time. Thank you very much in advance for your help with this. "
    "Some additional guidance that you should keep in mind while you work: the table reports revenue "
    "and net income in millions of dollars, and the margin column is a plain fraction rather than a "
    "percentage, so please convert it to a percentage if you mention it in your answer. The filing "
    "excerpt describes each quarter in a separate line, and the lines are listed in chronological "
    "order from the first quarter to the fourth quarter. When a figure appears in both the table and "
    "the filing excerpt, please treat the table as the more precise source, and please mention it "
    "explicitly if the two sources seem to disagree with each other in any way. Also, please do not "
    "round any intermediate results, and only round the final answer to one decimal place. "
    "Question: by how much did net income for the retail segment change between the third quarter "
    "and the fourth quarter, and what was the main reason for that change according to the filing?"
)
(HERE / "fixtures" / "prompt.txt").write_text(prompt + "\n")

rows = ["quarter,segment,revenue,net_income,margin"]
for q in ["Q1", "Q2", "Q3", "Q4"]:
    for s in ["retail", "services"]:
        rev = rng.uniform(100, 900)
        rows.append(f"{q},{s},{rev:.4f},{rev * rng.uniform(0.05, 0.2):.4f},{rng.uniform(0.05, 0.35):.5f}")
(HERE / "fixtures" / "segments.csv").write_text("\n".join(rows) + "\n")
