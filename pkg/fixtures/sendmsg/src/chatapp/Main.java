package chatapp;

import chatapp.crypto.Cipher;
import chatapp.jobs.PushJob;
import chatapp.msg.Processor;
import chatapp.outbox.Sender;
import chatapp.store.SessionStore;
import chatapp.ui.TextBox;

public class Main {
    public static void main(String[] args) throws Exception {
        SessionStore store = new SessionStore(null);
        Sender sender = new Sender();
        Cipher cipher = new Cipher(sender);
        Processor processor = new Processor(store, cipher);
        PushJob job = new PushJob(new TextBox(), processor);
        store.refresh();
        job.deliver();
    }
}
