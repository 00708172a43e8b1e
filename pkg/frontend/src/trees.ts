// Decision-tree help content, one tree per question block, rendered
// generically from static data. Placeholder wording pending the project's
// finalized guideline text.

export interface TreeNode {
  question: string;
  yes: TreeNode | string;
  no: TreeNode | string;
}

export const DECISION_TREES: Record<string, TreeNode> = {
  accuracy: {
    question: "Does the edited image apply the requested change at all?",
    yes: {
      question: "Does it fully follow the instruction?",
      yes: {
        question: "Does the result look the way a user would expect?",
        yes: "Choose: Accurate",
        no: "Choose: Accurate, But Unexpected",
      },
      no: "Choose: Inaccurate, Reflects Instruction",
    },
    no: "Choose: Inaccurate",
  },
  contextual: {
    question: "Does the edited content fit the instruction, the scene, and common sense?",
    yes: "No feedback is required when the accuracy level is Accurate.",
    no: "Describe what is off: scene fit, expectations, plausibility.",
  },
  technical: {
    question: "Does the edited area keep the image's resolution and sharpness?",
    yes: {
      question: "Any blur, smoothing, or pixelation inside the edited area?",
      yes: "Answer No and describe the issue.",
      no: "Answer Yes.",
    },
    no: "Answer No and describe the issue.",
  },
  artifacts: {
    question: "Is anything outside the intended change distorted, added, or removed?",
    yes: {
      question: "Would a viewer immediately notice it?",
      yes: "Choose: Significant",
      no: "Choose: Mild",
    },
    no: "Choose: No Artifact",
  },
  caption: {
    question: "Does the prefilled caption describe the main difference correctly?",
    yes: {
      question: "Are there additional differences (including artifacts) it misses?",
      yes: "Correct it: extend the caption with every difference.",
      no: "Accept it.",
    },
    no: "Correct it: rewrite the caption, then add any further differences.",
  },
};

function renderNode(node: TreeNode | string): HTMLElement {
  if (typeof node === "string") {
    const leaf = document.createElement("div");
    leaf.className = "tree-leaf";
    leaf.textContent = node;
    return leaf;
  }
  const el = document.createElement("div");
  el.className = "tree-node";
  const q = document.createElement("div");
  q.className = "tree-question";
  q.textContent = node.question;
  el.appendChild(q);
  for (const [label, child] of [["Yes", node.yes], ["No", node.no]] as const) {
    const branch = document.createElement("div");
    branch.className = "tree-branch";
    const tag = document.createElement("span");
    tag.className = "tree-tag";
    tag.textContent = label + ":";
    branch.appendChild(tag);
    branch.appendChild(renderNode(child));
    el.appendChild(branch);
  }
  return el;
}

export function renderTree(key: string): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "tree-panel";
  const node = DECISION_TREES[key];
  panel.appendChild(renderNode(node ?? "No guidance available."));
  return panel;
}
