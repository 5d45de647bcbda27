"""Shared test data: the four sample questions with their model answers,
student answers and teacher grade pairs."""

from sagrade.corpus_io import Dataset, QuestionRecord, StudentAnswer

QUESTIONS = [
    (
        "q1",
        "What is the role of a prototype program in problem solving?",
        "To simulate the behaviour of portions of the desired software product.",
    ),
    (
        "q2",
        "How does the compiler handle inline functions?",
        "It makes a copy of the function code in every place where a function call is made.",
    ),
    (
        "q3",
        "How many dimensions need to be specified when passing a multi-dimensional "
        "array as an argument to a function?",
        "All the dimensions, except the first one.",
    ),
    (
        "q4",
        "What stages in the software life cycle are influenced by the testing stage?",
        "The testing stage can influence both the coding stage (phase 5) and the "
        "solution refinement stage (phase 7).",
    ),
]

ANSWERS = {
    "q1": [
        (
            "High risk problems are address in the prototype program to make sure "
            "that the program is feasible.  A prototype may also be used to show a "
            "company that the software can be possibly programmed.",
            4,
            3,
        ),
        ("it simulates the behavior of portions of the desired software product", 5, 5),
    ],
    "q2": [
        (
            "For inline functions, the compiler creates a copy of the function's "
            "code in place so it doesn't have to make a function call and add to "
            "the function call stack.",
            5,
            5,
        ),
        (
            "It expands a small function out... making your code longer, but also "
            "makes it run faster.",
            4,
            4,
        ),
        (
            "The compiler can ignore the inline qualifier and typically does so "
            "for all but the smallest functions.",
            2,
            2,
        ),
    ],
    "q3": [
        (
            "All dimensions except for the first one need to be specified when "
            "passing an array to a function, the compiler needs to know how many "
            "memory addresses to skip to make it back to the 2nd element in the "
            "first dimension.  The size of the first dimension does not need to "
            "be specified.",
            5,
            5,
        ),
        ("All dimensions, excluding the first one.", 5, 5),
        ("None, just pass the array name.", 3, 1),
        ("All of the dimensions must be specified.", 5, 2),
        ("At least 2, depending on how many arrays are being used.", 4, 1),
    ],
    "q4": [
        ("The implementation phase and the maintenance phase are effected.", 5, 3),
        ("Elaboration, Construction, and Transition are all affected by testing.", 2, 2),
        ("Coding and refining.", 5, 5),
        (
            "1- specification 2- design  3- risk analysis  4- verification  "
            "5- coding  6- testing 7- refining  8- production  9- maintenance.",
            4,
            1,
        ),
    ],
}


def worked_example_dataset() -> Dataset:
    questions = [QuestionRecord(qid, qtext, model) for qid, qtext, model in QUESTIONS]
    answers = []
    for qid, rows in ANSWERS.items():
        for i, (text, g1, g2) in enumerate(rows, start=1):
            answers.append(StudentAnswer(f"{qid}.{i}", qid, text, float(g1), float(g2)))
    return Dataset(questions, answers)
